#include "qgan/tomography.hpp"

#include <algorithm>
#include <cmath>

#include "qgan/error.hpp"

namespace qgan::tomo {

namespace {

const Eigen::Matrix2cd& identity2() {
  static const Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  return m;
}

const Eigen::Matrix2cd& pauli_by_index(int i) {
  switch (i) {
    case 1: return pauli_matrix(PauliBasis::kX);
    case 2: return pauli_matrix(PauliBasis::kY);
    case 3: return pauli_matrix(PauliBasis::kZ);
    default: return identity2();
  }
}

// Expectation of a +/-1 valued observable, sampled if requested.
double sample_pm(double exact, Shots shots, Rng& rng) {
  exact = std::clamp(exact, -1.0, 1.0);
  if (!shots) return exact;
  if (*shots == 0) throw InvalidArgument("measure_expectation: shots must be positive");
  const double p_plus = (1.0 + exact) / 2.0;
  const auto counts = sample_counts(ProbVector{p_plus, 1.0 - p_plus}, *shots, rng);
  return (static_cast<double>(counts[0]) - static_cast<double>(counts[1])) / static_cast<double>(*shots);
}

}  // namespace

const Eigen::Matrix2cd& pauli_matrix(PauliBasis basis) {
  static const Eigen::Matrix2cd x = pauli_x().matrix();
  static const Eigen::Matrix2cd y = pauli_y().matrix();
  static const Eigen::Matrix2cd z = pauli_z().matrix();
  switch (basis) {
    case PauliBasis::kX: return x;
    case PauliBasis::kY: return y;
    case PauliBasis::kZ: break;
  }
  return z;
}

double measure_expectation(const DensityMatrix& rho, PauliBasis basis, Shots shots, Rng& rng) {
  if (rho.qubit_count() != 1) throw InvalidArgument("measure_expectation: single-qubit state required");
  return sample_pm(expectation(pauli_matrix(basis), rho), shots, rng);
}

PauliExpectations measure_all(const DensityMatrix& rho, Shots shots, Rng& rng) {
  PauliExpectations e;
  e.x = measure_expectation(rho, PauliBasis::kX, shots, rng);
  e.y = measure_expectation(rho, PauliBasis::kY, shots, rng);
  e.z = measure_expectation(rho, PauliBasis::kZ, shots, rng);
  return e;
}

std::array<double, 3> project_bloch(const PauliExpectations& e) {
  if (!std::isfinite(e.x) || !std::isfinite(e.y) || !std::isfinite(e.z)) {
    throw InvalidArgument("reconstruct: expectations must be finite");
  }
  const double norm = std::sqrt(e.x * e.x + e.y * e.y + e.z * e.z);
  const double scale = 1.0 / std::max(1.0, norm);
  return {e.x * scale, e.y * scale, e.z * scale};
}

DensityMatrix reconstruct(const PauliExpectations& expectations) {
  const auto r = project_bloch(expectations);
  Eigen::Matrix2cd m;
  m << (1.0 + r[2]) / 2.0, Complex(r[0], -r[1]) / 2.0,
       Complex(r[0], r[1]) / 2.0, (1.0 - r[2]) / 2.0;
  return DensityMatrix(m);
}

double tomography_roundtrip(const DensityMatrix& rho, Shots shots, std::uint64_t seed) {
  Rng rng(seed);
  return fidelity(rho, reconstruct(measure_all(rho, shots, rng)));
}

PauliTable measure_two_qubit(const DensityMatrix& rho, Shots shots, Rng& rng) {
  if (rho.qubit_count() != 2) throw InvalidArgument("measure_two_qubit: two-qubit state required");
  PauliTable t{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == 0 && j == 0) {
        t[0][0] = 1.0;
        continue;
      }
      Eigen::Matrix4cd op;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) op.block<2, 2>(2 * a, 2 * b) = pauli_by_index(i)(a, b) * pauli_by_index(j);
      t[i][j] = sample_pm(expectation(op, rho), shots, rng);
    }
  }
  return t;
}

DensityMatrix reconstruct_two_qubit(const PauliTable& table) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (!std::isfinite(table[i][j])) throw InvalidArgument("reconstruct_two_qubit: non-finite entry");
      Eigen::Matrix4cd op;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) op.block<2, 2>(2 * a, 2 * b) = pauli_by_index(i)(a, b) * pauli_by_index(j);
      m += (i == 0 && j == 0 ? 1.0 : table[i][j]) * op / 4.0;
    }
  }
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  if (ev.sum() <= 0.0) throw InvalidArgument("reconstruct_two_qubit: no positive spectrum");
  ev /= ev.sum();
  Eigen::Matrix4cd out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  out /= out.trace().real();
  return DensityMatrix(out);
}

}  // namespace qgan::tomo
