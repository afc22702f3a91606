#include "qgan/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qgan/error.hpp"

namespace qgan {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(double theta, const char* what) {
  if (!std::isfinite(theta)) throw InvalidArgument(std::string(what) + ": angle must be finite");
}

void require_qubit_dim(Eigen::Index n, const char* what) {
  if (n != 2 && n != 4) {
    throw InvalidArgument(std::string(what) + ": dimension must be 2 or 4, got " +
                          std::to_string(n));
  }
}

// Wraps to [-pi, pi).
double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0) w += 2.0 * kPi;
  return w - kPi;
}

}  // namespace

// ---- Unitary ---------------------------------------------------------------

Unitary::Unitary(Eigen::MatrixXcd m, double tolerance) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidArgument("Unitary: matrix must be square");
  require_qubit_dim(m_.rows(), "Unitary");
  if (!m_.allFinite()) throw InvalidArgument("Unitary: non-finite entry");
  const Eigen::MatrixXcd defect =
      m_ * m_.adjoint() - Eigen::MatrixXcd::Identity(m_.rows(), m_.cols());
  if (defect.cwiseAbs().maxCoeff() > tolerance) {
    throw InvalidArgument("Unitary: U*U^dagger deviates from identity by " +
                          std::to_string(defect.cwiseAbs().maxCoeff()));
  }
}

Unitary Unitary::identity(int dim) {
  require_qubit_dim(dim, "Unitary::identity");
  return Unitary(Eigen::MatrixXcd::Identity(dim, dim), Trusted{});
}

Unitary Unitary::adjoint() const { return Unitary(m_.adjoint(), Trusted{}); }

Unitary operator*(const Unitary& a, const Unitary& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("Unitary product: dimension mismatch");
  return Unitary(a.m_ * b.m_, Unitary::Trusted{});
}

// ---- PureState -------------------------------------------------------------

PureState::PureState(Eigen::VectorXcd amplitudes) : amplitudes_(std::move(amplitudes)) {
  require_qubit_dim(amplitudes_.size(), "PureState");
  if (!amplitudes_.allFinite()) throw InvalidArgument("PureState: non-finite amplitude");
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-12) {
    throw InvalidArgument("PureState: squared norm is " + std::to_string(norm2));
  }
}

PureState PureState::normalized(Eigen::VectorXcd amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("PureState: cannot normalize");
  return PureState(amplitudes / n);
}

PureState PureState::basis(int qubit_count, int index) {
  if (qubit_count != 1 && qubit_count != 2) throw InvalidArgument("PureState::basis: 1 or 2 qubits");
  const int dim = 1 << qubit_count;
  if (index < 0 || index >= dim) throw InvalidArgument("PureState::basis: index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(index) = 1.0;
  return PureState(std::move(v));
}

// ---- DensityMatrix ---------------------------------------------------------

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw InvalidArgument("DensityMatrix: not square");
  require_qubit_dim(entries_.rows(), "DensityMatrix");
  if (!entries_.allFinite()) throw InvalidArgument("DensityMatrix: non-finite entry");
  const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12) throw InvalidArgument("DensityMatrix: not Hermitian");
  const Complex tr = entries_.trace();
  if (std::abs(tr - 1.0) > 1e-12) throw InvalidArgument("DensityMatrix: trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidArgument("DensityMatrix: negative eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  Eigen::MatrixXcd m = psi.amplitudes() * psi.amplitudes().adjoint();
  // Exact Hermiticity; the outer product can differ from its adjoint by roundoff.
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int qubit_count) {
  const int dim = 1 << qubit_count;
  require_qubit_dim(dim, "DensityMatrix::maximally_mixed");
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

// ---- ProbVector ------------------------------------------------------------

ProbVector::ProbVector(Eigen::VectorXd probabilities) : p_(std::move(probabilities)) {
  require_qubit_dim(p_.size(), "ProbVector");
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_(i)) || p_(i) < 0.0) {
      throw InvalidArgument("ProbVector: entry " + std::to_string(i) + " is negative or non-finite");
    }
  }
  if (std::abs(p_.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("ProbVector: entries sum to " + std::to_string(p_.sum()));
  }
}

ProbVector::ProbVector(std::initializer_list<double> probabilities)
    : ProbVector(Eigen::Map<const Eigen::VectorXd>(probabilities.begin(),
                                                   static_cast<Eigen::Index>(probabilities.size()))) {}

// ---- Gates -----------------------------------------------------------------

Unitary ry(double theta) {
  require_finite(theta, "ry");
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Eigen::Matrix2cd m;
  m << c, -s, s, c;
  return Unitary(m);
}

Unitary rz(double theta) {
  require_finite(theta, "rz");
  Eigen::Matrix2cd m;
  m << std::polar(1.0, -theta / 2), 0.0, 0.0, std::polar(1.0, theta / 2);
  return Unitary(m);
}

Unitary hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd m;
  m << r, r, r, -r;
  return Unitary(m);
}

Unitary pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return Unitary(m);
}

Unitary pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return Unitary(m);
}

Unitary pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return Unitary(m);
}

Unitary su2(double theta_z1, double theta_y, double theta_z2) {
  return rz(theta_z2) * ry(theta_y) * rz(theta_z1);
}

Unitary tensor(const Unitary& first, const Unitary& second) {
  if (first.dim() != 2 || second.dim() != 2) throw InvalidArgument("tensor: single-qubit gates only");
  Eigen::Matrix4cd m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = first(i, j) * second.matrix();
  return Unitary(m);
}

Su2Angles zyz_decompose(const Unitary& u) {
  if (u.dim() != 2) throw InvalidArgument("zyz_decompose: single-qubit gate required");
  // Remove the global phase so that det = 1; then
  //   u = [[e^{-i(a+b)/2} c, -e^{-i(a-b)/2} s], [e^{i(a-b)/2} s, e^{i(a+b)/2} c]]
  // with a = z2, b = z1, c = cos(y/2), s = sin(y/2).
  const Complex det = u.matrix().determinant();
  const Eigen::Matrix2cd w = u.matrix() / std::sqrt(det);
  const double c = std::abs(w(0, 0));
  const double s = std::abs(w(1, 0));
  Su2Angles out;
  out.y = 2.0 * std::atan2(s, c);
  constexpr double kDegenerate = 1e-12;
  if (s < kDegenerate) {
    out.z2 = 0.0;
    out.z1 = wrap_angle(-2.0 * std::arg(w(0, 0)));
    out.y = 0.0;
  } else if (c < kDegenerate) {
    out.z2 = 0.0;
    out.z1 = wrap_angle(-2.0 * std::arg(w(1, 0)));
    out.y = kPi;
  } else {
    const double half_sum = -std::arg(w(0, 0));   // (a+b)/2
    const double half_diff = std::arg(w(1, 0));   // (a-b)/2
    out.z2 = wrap_angle(half_sum + half_diff);
    out.z1 = wrap_angle(half_sum - half_diff);
  }
  return out;
}

Unitary random_unitary(Rng& rng) {
  // QR of a complex Ginibre matrix with the phases of R's diagonal divided out.
  Eigen::Matrix2cd z;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) z(i, j) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(z);
  Eigen::Matrix2cd q = qr.householderQ();
  const Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 2; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return Unitary(q, 1e-10);
}

// ---- State operations ------------------------------------------------------

PureState apply_single(const PureState& state, const Unitary& gate, int qubit) {
  if (gate.dim() != 2) throw InvalidArgument("apply_single: gate must be single-qubit");
  if (qubit < 0 || qubit >= state.qubit_count()) {
    throw InvalidArgument("apply_single: qubit index " + std::to_string(qubit) + " out of range");
  }
  if (state.qubit_count() == 1) return PureState::normalized(gate.matrix() * state.amplitudes());
  const Unitary full = qubit == 0 ? tensor(gate, Unitary::identity(2)) : tensor(Unitary::identity(2), gate);
  return apply(state, full);
}

PureState apply(const PureState& state, const Unitary& gate) {
  if (gate.dim() != state.dim()) throw InvalidArgument("apply: dimension mismatch");
  Eigen::VectorXcd out = gate.matrix() * state.amplitudes();
  // Unitaries preserve the norm exactly; this only strips accumulated roundoff.
  out /= out.norm();
  return PureState(std::move(out));
}

PureState controlled_pair(const PureState& state, const Unitary& v, const Unitary& u) {
  if (state.qubit_count() != 2) throw InvalidArgument("controlled_pair: two-qubit state required");
  if (v.dim() != 2 || u.dim() != 2) throw InvalidArgument("controlled_pair: single-qubit branches required");
  Eigen::VectorXcd out(4);
  out.head<2>() = v.matrix() * state.amplitudes().head<2>();
  out.tail<2>() = u.matrix() * state.amplitudes().tail<2>();
  out /= out.norm();
  return PureState(std::move(out));
}

ProbVector born_probabilities(const PureState& state) {
  Eigen::VectorXd p = state.amplitudes().cwiseAbs2();
  p /= p.sum();
  return ProbVector(std::move(p));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
  if (rho.qubit_count() != 2) throw InvalidArgument("partial_trace: two-qubit density matrix required");
  if (keep != 0 && keep != 1) throw InvalidArgument("partial_trace: keep must be 0 or 1");
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 2; ++k) {
        // Kept index a/b, traced index k.
        const int row = keep == 0 ? 2 * a + k : 2 * k + a;
        const int col = keep == 0 ? 2 * b + k : 2 * k + b;
        out(a, b) += rho(row, col);
      }
    }
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(out);
}

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10) throw InvalidArgument("psd_sqrt: matrix is not positive semidefinite");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidArgument("fidelity: dimension mismatch");
  // Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the nuclear norm of sqrt(rho) sqrt(sigma).
  const Eigen::MatrixXcd product = psd_sqrt(rho.entries()) * psd_sqrt(sigma.entries());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(product);
  const double tr = svd.singularValues().sum();
  return std::clamp(tr * tr, 0.0, 1.0);
}

double expectation(const Eigen::MatrixXcd& op, const DensityMatrix& rho) {
  if (op.rows() != rho.dim() || op.cols() != rho.dim()) throw InvalidArgument("expectation: dimension mismatch");
  return (op * rho.entries()).trace().real();
}

std::vector<std::uint64_t> sample_counts(const ProbVector& p, std::uint64_t shots, Rng& rng) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(p.size()), 0);
  std::vector<double> cumulative(counts.size());
  double acc = 0.0;
  for (int i = 0; i < p.size(); ++i) cumulative[i] = (acc += p[i]);
  // Zero-probability outcomes can never be drawn.
  int last_nonzero = 0;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) last_nonzero = i;
  for (std::uint64_t n = 0; n < shots; ++n) {
    const double u = rng.uniform() * acc;
    int k = 0;
    while (k < last_nonzero && (u >= cumulative[k] || p[k] == 0.0)) ++k;
    ++counts[k];
  }
  return counts;
}

std::vector<std::uint64_t> sample_counts(const ProbVector& p, std::uint64_t shots, std::uint64_t seed) {
  Rng rng(seed);
  return sample_counts(p, shots, rng);
}

PureState canonical_phase(const PureState& state) {
  for (int i = 0; i < state.dim(); ++i) {
    const double mag = std::abs(state[i]);
    if (mag > 1e-12) return PureState::normalized(state.amplitudes() * (std::conj(state[i]) / mag));
  }
  return state;
}

bool equal_up_to_phase(const PureState& a, const PureState& b, double tolerance) {
  if (a.dim() != b.dim()) return false;
  // |<a|b>| = 1 iff the states agree up to phase; compare amplitudes directly
  // after aligning the phase of the overlap.
  const Complex overlap = a.amplitudes().dot(b.amplitudes());
  if (std::abs(overlap) < 1e-300) return false;
  const Eigen::VectorXcd aligned = b.amplitudes() * (std::conj(overlap) / std::abs(overlap));
  return (a.amplitudes() - aligned).cwiseAbs().maxCoeff() <= tolerance;
}

}  // namespace qgan
