#include "qgan/chip.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qgan/error.hpp"

namespace qgan::chip {

namespace {

constexpr double kPi = std::numbers::pi;

// Global phase of `u` relative to its ZYZ reconstruction.
Complex phase_relative_to(const Unitary& u, const Unitary& reference) {
  const Complex overlap = (reference.matrix().adjoint() * u.matrix()).trace() / 2.0;
  return overlap / std::abs(overlap);
}

void require_shifter_index(int index) {
  if (index < 1 || index > shifter::kCount) {
    throw InvalidArgument("shifter index " + std::to_string(index) + " outside 1.." +
                          std::to_string(shifter::kCount));
  }
}

}  // namespace

Unitary amzi_transfer(double phi, Photon photon) {
  if (!std::isfinite(phi)) throw InvalidArgument("amzi_transfer: phase must be finite");
  const double s = std::sin(phi / 2), c = std::cos(phi / 2);
  Eigen::Matrix2cd m;
  if (photon == Photon::kSignal) {
    m << s, c, c, -s;
    m *= std::polar(1.0, (phi + kPi) / 2);
  } else {
    m << c, s, s, -c;
    m *= std::polar(1.0, (phi + 2 * kPi) / 2);
  }
  return Unitary(m);
}

double coincidence_rate(double phi, double c_max) {
  if (!(c_max >= 0.0)) throw InvalidArgument("coincidence_rate: c_max must be non-negative");
  const double s = std::sin(phi / 2);
  return c_max * s * s * s * s;
}

double derive_coincidence_from_state(double phi, Port entry_port) {
  // Both photons enter the same port; the creation operator of input mode k
  // maps to sum_j U[j][k] of output mode j (j = 0 is c, j = 1 is d).
  const int in = entry_port == Port::kA ? 0 : 1;
  const Unitary us = amzi_transfer(phi, Photon::kSignal);
  const Unitary ui = amzi_transfer(phi, Photon::kIdler);
  const Complex amplitude = us(0, in) * ui(1, in);  // signal in c, idler in d
  return std::norm(amplitude);
}

// ---- Calibration helpers ---------------------------------------------------

double HeaterCalibration::counts_at(double current_ma) const {
  const double s = std::sin(alpha * current_ma * current_ma + beta);
  return a * s * s * s * s + b;
}

double current_for_phase(const HeaterCalibration& cal, double phi_target) {
  if (!(cal.alpha > 0.0)) throw InvalidArgument("current_for_phase: alpha must be positive");
  if (!std::isfinite(phi_target)) throw InvalidArgument("current_for_phase: phase must be finite");
  double t = std::fmod(phi_target - cal.beta, 2 * kPi);
  if (t < 0) t += 2 * kPi;
  return std::sqrt(t / cal.alpha);
}

std::vector<CalibrationSample> synthetic_fringe(const HeaterCalibration& cal,
                                                std::span<const double> currents_ma,
                                                const FringeNoise& noise, Rng& rng) {
  std::vector<CalibrationSample> out;
  out.reserve(currents_ma.size());
  for (double current : currents_ma) {
    double counts = cal.counts_at(current);
    if (noise.poisson) {
      // Knuth for small means, normal approximation above.
      if (counts < 30.0) {
        const double limit = std::exp(-counts);
        double prod = rng.uniform();
        int k = 0;
        while (prod > limit) {
          prod *= rng.uniform();
          ++k;
        }
        counts = k;
      } else {
        counts = std::max(0.0, std::round(rng.normal(counts, std::sqrt(counts))));
      }
    }
    if (noise.relative_sigma > 0.0) counts += rng.normal(0.0, noise.relative_sigma * cal.a);
    if (noise.subtract_background) counts -= cal.b;
    out.push_back({current, counts});
  }
  return out;
}

// ---- Source ----------------------------------------------------------------

SourceAmplitudes source_state(double phi1, double phi2, double theta8, double c_max1,
                              double c_max2) {
  const double c1 = coincidence_rate(phi1, c_max1);
  const double c2 = coincidence_rate(phi2, c_max2);
  if (c1 + c2 <= 0.0) throw InvalidArgument("source_state: both sources give zero coincidences");
  const double angle = std::atan2(std::sqrt(c2), std::sqrt(c1));
  return {std::polar(std::cos(angle), theta8), Complex(std::sin(angle), 0.0)};
}

PureState entangled_source(double rotation) {
  if (!std::isfinite(rotation)) throw InvalidArgument("entangled_source: rotation must be finite");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(0) = std::cos(rotation / 2);
  v(3) = std::sin(rotation / 2);
  return PureState::normalized(std::move(v));
}

AmziPhases solve_source_phases(double weight_one, double c_max1, double c_max2) {
  if (!(weight_one >= 0.0 && weight_one <= 1.0)) {
    throw InvalidArgument("solve_source_phases: weight must lie in [0, 1]");
  }
  if (!(c_max1 > 0.0 && c_max2 > 0.0)) throw InvalidArgument("solve_source_phases: c_max must be positive");
  // sin^4(phi/2) = fraction  <=>  phi = 2 asin(fraction^(1/4))
  auto phase_for = [](double fraction) { return 2.0 * std::asin(std::pow(std::clamp(fraction, 0.0, 1.0), 0.25)); };
  AmziPhases out;
  if (weight_one * (c_max1 + c_max2) <= c_max2) {
    // Source 1 fully open; dim source 2.
    out.phi1 = kPi;
    const double c2 = weight_one >= 1.0 ? c_max2 : c_max1 * weight_one / (1.0 - weight_one);
    out.phi2 = phase_for(c2 / c_max2);
  } else {
    out.phi2 = kPi;
    const double c1 = c_max2 * (1.0 - weight_one) / weight_one;
    out.phi1 = phase_for(c1 / c_max1);
  }
  return out;
}

// ---- Configuration ---------------------------------------------------------

ChipConfiguration::ChipConfiguration() : ChipConfiguration(default_broken_unitary()) {}

ChipConfiguration::ChipConfiguration(Unitary broken_unitary) : broken_(std::move(broken_unitary)) {
  if (broken_.dim() != 2) throw InvalidArgument("ChipConfiguration: broken unitary must be 2x2");
}

Unitary ChipConfiguration::default_broken_unitary() {
  Rng rng(kDefaultBrokenSeed);
  return random_unitary(rng);
}

void ChipConfiguration::set_amzi_phases(double phi1, double phi2) {
  if (!std::isfinite(phi1) || !std::isfinite(phi2)) throw InvalidArgument("AMZI phases must be finite");
  amzi_ = {phi1, phi2};
}

double ChipConfiguration::shifter(int index) const {
  require_shifter_index(index);
  return shifters_[index - 1];
}

void ChipConfiguration::set_shifter(int index, double value) {
  require_shifter_index(index);
  if (index == shifter::kBroken) throw InvalidArgument("shifter 11 is broken and cannot be driven");
  if (!std::isfinite(value)) throw InvalidArgument("shifter phase must be finite");
  shifters_[index - 1] = value;
}

void ChipConfiguration::set_c_max(double c_max1, double c_max2) {
  if (!(c_max1 > 0.0 && c_max2 > 0.0)) throw InvalidArgument("c_max must be positive");
  c_max_ = {c_max1, c_max2};
}

Unitary control_chain(const ChipConfiguration& config) {
  return config.broken_unitary() * su2(config.shifter(shifter::kControlZ1), config.shifter(shifter::kControlY),
                                       config.shifter(shifter::kControlZ2));
}

Unitary target_chain(const ChipConfiguration& config) {
  return ry(config.shifter(shifter::kTargetY2)) *
         su2(config.shifter(shifter::kTargetZ1), config.shifter(shifter::kTargetY1),
             config.shifter(shifter::kTargetZ2));
}

EquivalentCircuit equivalent_circuit(const ChipConfiguration& config) {
  const SourceAmplitudes amps =
      source_state(config.amzi_phase1(), config.amzi_phase2(), 0.0, config.c_max1(), config.c_max2());
  EquivalentCircuit c;
  c.source_rotation = 2.0 * std::atan2(amps.beta.real(), amps.alpha.real());
  c.v = su2(config.shifter(shifter::kVZ1), config.shifter(shifter::kVY), config.shifter(shifter::kVZ2));
  c.u = su2(config.shifter(shifter::kUZ1), config.shifter(shifter::kUY), config.shifter(shifter::kUZ2));
  c.control_gate = control_chain(config);
  c.target_gate = target_chain(config);
  return c;
}

PureState prepare_state(const EquivalentCircuit& circuit) {
  PureState psi = entangled_source(circuit.source_rotation);
  psi = controlled_pair(psi, circuit.v, circuit.u);
  return apply(psi, tensor(circuit.control_gate, circuit.target_gate));
}

PureState prepare_state(const ChipConfiguration& config) {
  const SourceAmplitudes amps =
      source_state(config.amzi_phase1(), config.amzi_phase2(), 0.0, config.c_max1(), config.c_max2());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(0) = amps.alpha;
  v(3) = amps.beta;
  PureState psi = PureState::normalized(std::move(v));
  const Unitary vg = su2(config.shifter(shifter::kVZ1), config.shifter(shifter::kVY), config.shifter(shifter::kVZ2));
  const Unitary ug = su2(config.shifter(shifter::kUZ1), config.shifter(shifter::kUY), config.shifter(shifter::kUZ2));
  psi = controlled_pair(psi, vg, ug);
  return apply(psi, tensor(control_chain(config), target_chain(config)));
}

ChipConfiguration configure_chip(const EquivalentCircuit& circuit, const ChipConfiguration& base) {
  ChipConfiguration config = base;
  const double c = std::cos(circuit.source_rotation / 2);
  const double s = std::sin(circuit.source_rotation / 2);
  const AmziPhases amzi = solve_source_phases(s * s, base.c_max1(), base.c_max2());
  config.set_amzi_phases(amzi.phi1, amzi.phi2);

  // The hardware source only produces non-negative amplitudes, and the ZYZ
  // fits of V and U drop a phase each. Both defects are diagonal on the
  // control qubit, commute with diag(V, U), and are folded into the control
  // chain.
  const Su2Angles va = zyz_decompose(circuit.v);
  const Su2Angles ua = zyz_decompose(circuit.u);
  const Complex v_phase = phase_relative_to(circuit.v, su2(va));
  const Complex u_phase = phase_relative_to(circuit.u, su2(ua));
  Eigen::Matrix2cd fix = Eigen::Matrix2cd::Zero();
  fix(0, 0) = v_phase;
  fix(1, 1) = u_phase * (c * s < 0.0 ? -1.0 : 1.0);
  const Unitary wanted_control = circuit.control_gate * Unitary(fix, 1e-10);

  const Su2Angles ctrl = zyz_decompose(base.broken_unitary().adjoint() * wanted_control);
  const Su2Angles tgt = zyz_decompose(circuit.target_gate);

  config.set_shifter(shifter::kVZ1, va.z1);
  config.set_shifter(shifter::kVY, va.y);
  config.set_shifter(shifter::kVZ2, va.z2);
  config.set_shifter(shifter::kUZ1, ua.z1);
  config.set_shifter(shifter::kUY, ua.y);
  config.set_shifter(shifter::kUZ2, ua.z2);
  config.set_shifter(shifter::kControlZ1, ctrl.z1);
  config.set_shifter(shifter::kControlY, ctrl.y);
  config.set_shifter(shifter::kControlZ2, ctrl.z2);
  config.set_shifter(shifter::kTargetZ1, tgt.z1);
  config.set_shifter(shifter::kTargetY1, tgt.y);
  config.set_shifter(shifter::kTargetZ2, tgt.z2);
  config.set_shifter(shifter::kTargetY2, 0.0);
  return config;
}

EquivalentCircuit circuit_for_probabilities(const ProbVector& p) {
  if (p.size() != 4) throw InvalidArgument("circuit_for_probabilities: four probabilities required");
  EquivalentCircuit c;
  c.source_rotation = 2.0 * std::atan2(std::sqrt(p[2] + p[3]), std::sqrt(p[0] + p[1]));
  // V acts on |0>: Ry(a)|0> = (cos a/2, sin a/2).
  c.v = ry(2.0 * std::atan2(std::sqrt(p[1]), std::sqrt(p[0])));
  // U acts on |1>: Ry(b)|1> = (-sin b/2, cos b/2).
  c.u = ry(2.0 * std::atan2(std::sqrt(p[2]), std::sqrt(p[3])));
  return c;
}

CompensationAngles compensate_broken_shifter(const Unitary& u_brok) {
  if (u_brok.dim() != 2) throw InvalidArgument("compensate_broken_shifter: 2x2 unitary required");
  const Su2Angles a = zyz_decompose(u_brok.adjoint());
  return {a.z1, a.y, a.z2};
}

CompensationAngles compensate_broken_shifter(const Eigen::Matrix2cd& u_brok) {
  return compensate_broken_shifter(Unitary(u_brok));
}

}  // namespace qgan::chip
