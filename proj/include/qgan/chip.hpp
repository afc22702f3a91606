#pragma once

// Model of the two-qubit silicon photonic chip.
//
// Hardware chain (qubit 0 = signal photon = control, qubit 1 = idler photon =
// target):
//
//   two SFWM spiral sources -> AMZI 1 / AMZI 2 (phases phi1, phi2)
//     -> path-entangled source  alpha|00> + beta|11>
//     -> controlled pair diag(V, U)           (path expansion of the idler)
//     -> control:  U_brok * Rz(t10) * Ry(t9) * Rz(t8)
//     -> target:   Ry(t14) * Rz(t13) * Ry(t12) * Rz(t7)
//
// Shifter t8 is the relative-phase shifter behind the sources. Rz on the
// control commutes with diag(V, U), so it is applied as the first gate of the
// control chain.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qgan/qcore.hpp"

namespace qgan::chip {

/// Physical shifter numbering (1-based) to gate-role map. The device
/// documentation does not name every shifter, so this table is the
/// declared assumption the whole model is written against.
namespace shifter {
inline constexpr int kVZ1 = 1;
inline constexpr int kVY = 2;
inline constexpr int kVZ2 = 3;
inline constexpr int kUZ1 = 4;
inline constexpr int kUY = 5;
inline constexpr int kUZ2 = 6;
inline constexpr int kTargetZ1 = 7;
inline constexpr int kControlZ1 = 8;
inline constexpr int kControlY = 9;
inline constexpr int kControlZ2 = 10;
inline constexpr int kBroken = 11;
inline constexpr int kTargetY1 = 12;
inline constexpr int kTargetZ2 = 13;
inline constexpr int kTargetY2 = 14;
inline constexpr int kCount = 14;
}  // namespace shifter

enum class Photon { kSignal, kIdler };
enum class Port { kA, kB };

/// AMZI transfer matrix for one photon of a pair, including the global phase
/// prefactor. The free spectral range is twice the pair's wavelength
/// separation, so the idler sees the signal matrix shifted by pi.
Unitary amzi_transfer(double phi, Photon photon);

/// Post-selected coincidence rate c_max * sin^4(phi / 2).
double coincidence_rate(double phi, double c_max);

/// Probability that a pair injected at `entry_port` leaves as signal in c and
/// idler in d, obtained by propagating both creation operators through the
/// AMZI matrices.
double derive_coincidence_from_state(double phi, Port entry_port);

// ---- Heater calibration ----------------------------------------------------

struct CalibrationSample {
  double current_ma = 0.0;
  double counts_per_s = 0.0;
};

/// counts(I) = a * sin^4(alpha * I^2 + beta) + b
struct HeaterCalibration {
  double a = 0.0;      ///< counts/s
  double alpha = 0.0;  ///< rad / mA^2
  double beta = 0.0;   ///< rad, canonicalized to [0, pi)
  double b = 0.0;      ///< counts/s background
  double rms = 0.0;    ///< residual RMS of the fit, counts/s

  double counts_at(double current_ma) const;
};

/// Grid search over (alpha, beta) with (a, b) solved linearly at each node,
/// then Levenberg-Marquardt refinement of all four coefficients.
///
/// sin^4 has period pi and is even, so the fit is canonicalized to alpha > 0
/// and beta in [0, pi). Throws InvalidArgument for fewer than 8 samples and
/// FitFailure for degenerate (constant) data.
HeaterCalibration fit_calibration(std::span<const CalibrationSample> samples);

/// Smallest non-negative current with alpha*I^2 + beta == phi (mod 2 pi).
double current_for_phase(const HeaterCalibration& cal, double phi_target);

struct FringeNoise {
  double relative_sigma = 0.0;      ///< Gaussian noise, fraction of `a`
  bool poisson = false;             ///< Poisson counting over a 1 s window
  bool subtract_background = false; ///< remove the constant `b` afterwards
};

/// Synthetic calibration sweep drawn from `cal` at the given currents.
std::vector<CalibrationSample> synthetic_fringe(const HeaterCalibration& cal,
                                                std::span<const double> currents_ma,
                                                const FringeNoise& noise, Rng& rng);

// ---- Entangled source ------------------------------------------------------

struct SourceAmplitudes {
  Complex alpha;
  Complex beta;
};

/// Amplitudes of the path-entangled state alpha|00> + beta|11> produced when
/// the AMZIs are set to (phi1, phi2): tan(phi) = sqrt(C2 / C1), alpha =
/// e^{i theta8} cos(phi), beta = sin(phi). Throws InvalidArgument when both
/// sources are dark.
SourceAmplitudes source_state(double phi1, double phi2, double theta8, double c_max1,
                              double c_max2);

/// cos(r/2)|00> + sin(r/2)|11>: the source viewed as Ry(r) on the control
/// followed by the pair correlation.
PureState entangled_source(double rotation);

struct AmziPhases {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// AMZI phases making |beta|^2 = weight_one; one AMZI is left fully open.
AmziPhases solve_source_phases(double weight_one, double c_max1, double c_max2);

// ---- Configuration and state preparation -----------------------------------

struct CompensationAngles {
  double theta8 = 0.0;
  double theta9 = 0.0;
  double theta10 = 0.0;
};

class ChipConfiguration {
 public:
  static constexpr std::uint64_t kDefaultBrokenSeed = 11;

  /// Uses the seeded default for the broken shifter's fixed unitary.
  ChipConfiguration();
  explicit ChipConfiguration(Unitary broken_unitary);

  /// Haar-random unitary drawn with kDefaultBrokenSeed.
  static Unitary default_broken_unitary();

  double amzi_phase1() const { return amzi_[0]; }
  double amzi_phase2() const { return amzi_[1]; }
  void set_amzi_phases(double phi1, double phi2);

  /// 1-based shifter index. Reading the broken shifter returns 0.
  double shifter(int index) const;
  /// Throws InvalidArgument for an index outside 1..14, for the broken
  /// shifter, or for a non-finite value.
  void set_shifter(int index, double value);

  double c_max1() const { return c_max_[0]; }
  double c_max2() const { return c_max_[1]; }
  void set_c_max(double c_max1, double c_max2);

  const Unitary& broken_unitary() const { return broken_; }

 private:
  std::array<double, 2> amzi_{0.0, 0.0};
  std::array<double, shifter::kCount> shifters_{};
  std::array<double, 2> c_max_{3000.0, 3000.0};
  Unitary broken_;
};

/// Logical view of the chip: the circuit a configuration implements.
struct EquivalentCircuit {
  double source_rotation = 0.0;
  Unitary v = Unitary::identity(2);
  Unitary u = Unitary::identity(2);
  Unitary control_gate = Unitary::identity(2);
  Unitary target_gate = Unitary::identity(2);
};

/// U_brok * Rz(t10) * Ry(t9) * Rz(t8).
Unitary control_chain(const ChipConfiguration& config);
/// Ry(t14) * Rz(t13) * Ry(t12) * Rz(t7).
Unitary target_chain(const ChipConfiguration& config);

EquivalentCircuit equivalent_circuit(const ChipConfiguration& config);

PureState prepare_state(const EquivalentCircuit& circuit);
PureState prepare_state(const ChipConfiguration& config);

/// Hardware settings realizing `circuit` (up to global phase) on a chip with
/// the broken unitary and source brightness of `base`.
ChipConfiguration configure_chip(const EquivalentCircuit& circuit,
                                 const ChipConfiguration& base = ChipConfiguration());

/// Real-amplitude circuit whose Born probabilities equal `p`: the source
/// rotation splits p0+p1 from p2+p3, V = Ry sets p0:p1 and U = Ry sets p2:p3.
EquivalentCircuit circuit_for_probabilities(const ProbVector& p);

/// Angles with Rz(t10) Ry(t9) Rz(t8) = U_brok^dagger up to global phase.
CompensationAngles compensate_broken_shifter(const Unitary& u_brok);
CompensationAngles compensate_broken_shifter(const Eigen::Matrix2cd& u_brok);

}  // namespace qgan::chip
