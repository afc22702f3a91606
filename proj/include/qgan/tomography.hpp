#pragma once

// Pauli-basis state tomography for one qubit, with an optional two-qubit
// linear-inversion variant.

#include <array>
#include <cstdint>
#include <optional>

#include "qgan/qcore.hpp"

namespace qgan::tomo {

enum class PauliBasis { kX, kY, kZ };

/// Number of shots per measurement basis; std::nullopt is the infinite-shot
/// (exact expectation) limit.
using Shots = std::optional<std::uint64_t>;
inline constexpr Shots kExact = std::nullopt;

struct PauliExpectations {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

const Eigen::Matrix2cd& pauli_matrix(PauliBasis basis);

/// tr(sigma_basis * rho) exactly, or (n_plus - n_minus) / shots when sampled.
double measure_expectation(const DensityMatrix& rho, PauliBasis basis, Shots shots, Rng& rng);

PauliExpectations measure_all(const DensityMatrix& rho, Shots shots, Rng& rng);

/// Bloch vector clipped into the unit ball: r -> r / max(1, |r|).
std::array<double, 3> project_bloch(const PauliExpectations& e);

/// (I + x X + y Y + z Z) / 2 after projection onto the physical set.
DensityMatrix reconstruct(const PauliExpectations& expectations);

/// Measure X, Y and Z, reconstruct, and return the fidelity to `rho`.
double tomography_roundtrip(const DensityMatrix& rho, Shots shots, std::uint64_t seed);

/// Two-qubit expectations <P_i (x) P_j> indexed [i][j] over {I, X, Y, Z};
/// entry [0][0] is 1.
using PauliTable = std::array<std::array<double, 4>, 4>;

PauliTable measure_two_qubit(const DensityMatrix& rho, Shots shots, Rng& rng);

/// Linear inversion sum_ij t_ij P_i (x) P_j / 4, then eigenvalue clipping and
/// trace renormalization.
DensityMatrix reconstruct_two_qubit(const PauliTable& table);

}  // namespace qgan::tomo
