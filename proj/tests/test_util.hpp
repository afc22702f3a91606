#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "qgan/qcore.hpp"
#include "qgan/rng.hpp"

namespace qgan::test {

inline ProbVector random_prob(Rng& rng) {
  Eigen::VectorXd v(4);
  for (int i = 0; i < 4; ++i) v(i) = -std::log(1.0 - rng.uniform());
  return ProbVector(Eigen::VectorXd(v / v.sum()));
}

inline PureState random_state(Rng& rng, int qubits) {
  Eigen::VectorXcd v(qubits == 1 ? 2 : 4);
  for (int i = 0; i < v.size(); ++i) v(i) = Complex(rng.normal(), rng.normal());
  return PureState::normalized(v);
}

/// Random full-rank state as a mixture of two random pure states.
inline DensityMatrix random_density(Rng& rng, int qubits) {
  const double w = rng.uniform();
  const Eigen::VectorXcd a = random_state(rng, qubits).amplitudes();
  const Eigen::VectorXcd b = random_state(rng, qubits).amplitudes();
  Eigen::MatrixXcd m = w * a * a.adjoint() + (1 - w) * b * b.adjoint();
  m = (m + m.adjoint()) / 2.0;
  return DensityMatrix(m);
}

inline Eigen::Matrix2cd matrix_of(const Unitary& u) { return u.matrix(); }

/// min over global phase of |a - e^{ig} b|_F.
inline double phase_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1, 0);
  return (a - phase * b).norm();
}

}  // namespace qgan::test
