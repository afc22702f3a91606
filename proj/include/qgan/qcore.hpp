#pragma once

// Exact linear algebra for one- and two-qubit systems.
//
// Basis ordering: for two qubits the index is 2*s + t, where s is qubit 0
// (signal photon, control) and t is qubit 1 (idler photon, target). The
// computational basis therefore runs |00>, |01>, |10>, |11>.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qgan/rng.hpp"

namespace qgan {

using Complex = std::complex<double>;

/// Square unitary on 1 or 2 qubits.
class Unitary {
 public:
  /// Throws InvalidArgument unless `m` is 2x2 or 4x4 with U*U^dagger = I to
  /// within `tolerance` elementwise.
  explicit Unitary(Eigen::MatrixXcd m, double tolerance = 1e-12);

  static Unitary identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  int qubit_count() const { return dim() == 2 ? 1 : 2; }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

  Unitary adjoint() const;
  friend Unitary operator*(const Unitary& a, const Unitary& b);

 private:
  struct Trusted {};
  Unitary(Eigen::MatrixXcd m, Trusted) : m_(std::move(m)) {}

  Eigen::MatrixXcd m_;
};

/// Normalized state vector on 1 or 2 qubits.
class PureState {
 public:
  /// Throws InvalidArgument unless the length is 2 or 4 and the norm is 1 to
  /// within 1e-12.
  explicit PureState(Eigen::VectorXcd amplitudes);

  /// Rescales `amplitudes` to unit norm first. Throws on the zero vector.
  static PureState normalized(Eigen::VectorXcd amplitudes);
  static PureState basis(int qubit_count, int index);

  int qubit_count() const { return amplitudes_.size() == 2 ? 1 : 2; }
  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex operator[](int i) const { return amplitudes_(i); }

 private:
  Eigen::VectorXcd amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite operator on 1 or 2 qubits.
class DensityMatrix {
 public:
  /// Throws InvalidArgument unless Hermitian to 1e-12, trace 1 to 1e-12 and
  /// every eigenvalue >= -1e-10.
  explicit DensityMatrix(Eigen::MatrixXcd entries);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(int qubit_count);

  int qubit_count() const { return entries_.rows() == 2 ? 1 : 2; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  Complex operator()(int row, int col) const { return entries_(row, col); }

 private:
  Eigen::MatrixXcd entries_;
};

/// Probability distribution over 2 or 4 outcomes.
class ProbVector {
 public:
  /// Throws InvalidArgument unless the length is 2 or 4, every entry is
  /// finite and >= 0, and the sum is 1 to within 1e-12.
  explicit ProbVector(Eigen::VectorXd probabilities);
  ProbVector(std::initializer_list<double> probabilities);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_(i); }
  const Eigen::VectorXd& values() const { return p_; }
  std::vector<double> to_vector() const { return {p_.data(), p_.data() + p_.size()}; }

 private:
  Eigen::VectorXd p_;
};

/// Euler angles of a ZYZ decomposition; the gate is rz(z2) * ry(y) * rz(z1),
/// so z1 acts first.
struct Su2Angles {
  double z1 = 0.0;
  double y = 0.0;
  double z2 = 0.0;
};

// Gates. Non-finite angles throw InvalidArgument.
Unitary ry(double theta);
Unitary rz(double theta);
Unitary hadamard();
Unitary pauli_x();
Unitary pauli_y();
Unitary pauli_z();
Unitary su2(double theta_z1, double theta_y, double theta_z2);
inline Unitary su2(const Su2Angles& a) { return su2(a.z1, a.y, a.z2); }

/// Kronecker product; `first` acts on qubit 0.
Unitary tensor(const Unitary& first, const Unitary& second);

/// Angles with su2(angles) equal to `u` up to a global phase.
///
/// Conventions: y in [0, pi]; z1, z2 in [-pi, pi); when y is 0 or pi only one
/// Z angle is determined and z2 is set to 0.
Su2Angles zyz_decompose(const Unitary& u);

/// Haar-random single-qubit unitary.
Unitary random_unitary(Rng& rng);

PureState apply_single(const PureState& state, const Unitary& gate, int qubit);
PureState apply(const PureState& state, const Unitary& gate);

/// Applies `v` to qubit 1 where qubit 0 is |0> and `u` where it is |1>,
/// i.e. multiplies by the block matrix diag(v, u).
PureState controlled_pair(const PureState& state, const Unitary& v, const Unitary& u);

ProbVector born_probabilities(const PureState& state);

/// Reduced state of qubit `keep` of a two-qubit density matrix.
DensityMatrix partial_trace(const DensityMatrix& rho, int keep);

/// Uhlmann fidelity [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Re tr(op * rho) for a Hermitian `op` of matching dimension.
double expectation(const Eigen::MatrixXcd& op, const DensityMatrix& rho);

/// Multinomial sample of `shots` outcomes.
std::vector<std::uint64_t> sample_counts(const ProbVector& p, std::uint64_t shots, Rng& rng);
std::vector<std::uint64_t> sample_counts(const ProbVector& p, std::uint64_t shots,
                                         std::uint64_t seed);

/// Copy of `state` multiplied by the phase that makes its first nonzero
/// amplitude real and positive.
PureState canonical_phase(const PureState& state);
bool equal_up_to_phase(const PureState& a, const PureState& b, double tolerance = 1e-10);

/// Hermitian PSD square root, clipping eigenvalues in [-1e-10, 0) to zero.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m);

}  // namespace qgan
