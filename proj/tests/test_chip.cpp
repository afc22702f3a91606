#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qgan/chip.hpp"
#include "qgan/error.hpp"
#include "qgan/io.hpp"
#include "test_util.hpp"

using namespace qgan;
using qgan::test::phase_distance;

namespace {

constexpr double kPi = std::numbers::pi;

double sin4(double phi) { return std::pow(std::sin(phi / 2), 4); }

std::vector<double> fringe_currents() {
  std::vector<double> i;
  for (int k = 0; k <= 60; ++k) i.push_back(0.25 * k);
  return i;
}

chip::HeaterCalibration generating_calibration() {
  chip::HeaterCalibration cal;
  cal.a = 3000;
  cal.alpha = 0.05;
  cal.beta = 0.3;
  cal.b = 20;
  return cal;
}

}  // namespace

TEST(Amzi, ExtremalSplits) {
  const Eigen::MatrixXcd s = chip::amzi_transfer(kPi, chip::Photon::kSignal).matrix();
  EXPECT_NEAR(std::abs(s(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s(0, 0)), 1.0, 1e-15);
  const Eigen::MatrixXcd i = chip::amzi_transfer(0, chip::Photon::kIdler).matrix();
  EXPECT_NEAR(std::abs(i(0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(i(1, 1)), 1.0, 1e-15);
}

TEST(Amzi, SignalIsIdlerShiftedByPiInMagnitude) {
  // The shifted idler matrix matches the signal one up to a sign pattern on
  // the off-diagonal, so entrywise magnitudes are compared.
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const double phi = rng.uniform(-10, 10);
    const Eigen::MatrixXcd s = chip::amzi_transfer(phi, chip::Photon::kSignal).matrix();
    const Eigen::MatrixXcd i = chip::amzi_transfer(phi + kPi, chip::Photon::kIdler).matrix();
    EXPECT_LT((s.cwiseAbs() - i.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(phase_distance(s, pauli_z().matrix() * i * pauli_z().matrix()), 1e-12);
  }
}

TEST(Coincidence, RateExamples) {
  EXPECT_EQ(chip::coincidence_rate(0, 3000), 0.0);
  EXPECT_NEAR(chip::coincidence_rate(kPi, 3000), 3000.0, 1e-9);
  EXPECT_NEAR(chip::coincidence_rate(kPi / 2, 3000), 750.0, 1e-9);
  EXPECT_THROW(chip::coincidence_rate(1.0, -1.0), InvalidArgument);
}

TEST(Coincidence, DerivedFromState) {
  EXPECT_NEAR(chip::derive_coincidence_from_state(kPi, chip::Port::kA), 1.0, 1e-15);
  EXPECT_NEAR(chip::derive_coincidence_from_state(0, chip::Port::kB), 1.0, 1e-15);
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const double phi = rng.uniform(-10, 10);
    EXPECT_NEAR(chip::derive_coincidence_from_state(phi, chip::Port::kA), chip::coincidence_rate(phi, 1.0), 1e-12);
    EXPECT_NEAR(chip::derive_coincidence_from_state(phi, chip::Port::kB), std::pow(std::cos(phi / 2), 4), 1e-12);
  }
}

TEST(Coincidence, DenseGridLaw) {
  for (int k = 0; k <= 6283; ++k) {
    const double phi = k * 1e-3;
    ASSERT_NEAR(chip::derive_coincidence_from_state(phi, chip::Port::kA), sin4(phi), 1e-12);
  }
}

TEST(Calibration, NoiselessFitRecoversCoefficients) {
  const auto currents = fringe_currents();
  Rng rng(3);
  const auto samples = chip::synthetic_fringe(generating_calibration(), currents, {}, rng);
  const chip::HeaterCalibration fit = chip::fit_calibration(samples);
  EXPECT_NEAR(fit.a / 3000.0, 1.0, 1e-6);
  EXPECT_NEAR(fit.alpha / 0.05, 1.0, 1e-6);
  EXPECT_NEAR(fit.beta / 0.3, 1.0, 1e-6);
  EXPECT_NEAR(fit.b / 20.0, 1.0, 1e-6);
  EXPECT_LT(fit.rms, 1e-6);
}

TEST(Calibration, BundledFringeFixture) {
  const std::string text = io::read_text_file(std::string(QGAN_DATA_DIR) + "/calibration/fringe.csv");
  const auto samples = io::parse_calibration_csv(text);
  ASSERT_EQ(samples.size(), 61u);
  const chip::HeaterCalibration fit = chip::fit_calibration(samples);
  EXPECT_NEAR(fit.a / 3000.0, 1.0, 1e-6);
  EXPECT_NEAR(fit.alpha / 0.05, 1.0, 1e-6);
  EXPECT_NEAR(fit.beta / 0.3, 1.0, 1e-6);
  EXPECT_NEAR(fit.b / 20.0, 1.0, 1e-6);
}

TEST(Calibration, OnePercentNoiseRecoversAmplitude) {
  const auto currents = fringe_currents();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    chip::FringeNoise noise;
    noise.relative_sigma = 0.01;
    const auto fit = chip::fit_calibration(chip::synthetic_fringe(generating_calibration(), currents, noise, rng));
    EXPECT_NEAR(fit.a / 3000.0, 1.0, 0.03) << "seed " << seed;
  }
}

TEST(Calibration, ConstantCountsFail) {
  std::vector<chip::CalibrationSample> samples;
  for (double i : fringe_currents()) samples.push_back({i, 100.0});
  EXPECT_THROW(chip::fit_calibration(samples), FitFailure);
  samples.resize(5);
  EXPECT_THROW(chip::fit_calibration(samples), InvalidArgument);
}

TEST(Calibration, CurrentForPhase) {
  chip::HeaterCalibration cal = generating_calibration();
  EXPECT_NEAR(chip::current_for_phase(cal, cal.beta), 0.0, 1e-12);
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const double phi = rng.uniform(-20, 20);
    const double i = chip::current_for_phase(cal, phi);
    EXPECT_GE(i, 0.0);
    const double d = std::remainder(cal.alpha * i * i + cal.beta - phi, 2 * kPi);
    EXPECT_NEAR(d, 0.0, 1e-9);
  }
  cal.beta = 0;
  EXPECT_NEAR(chip::current_for_phase(cal, kPi), std::sqrt(kPi / 0.05), 1e-12);
  cal.alpha = 0;
  EXPECT_THROW(chip::current_for_phase(cal, 1.0), InvalidArgument);
}

TEST(Source, Examples) {
  const auto balanced = chip::source_state(kPi, kPi, 0, 3000, 3000);
  EXPECT_NEAR(std::abs(balanced.alpha - Complex(1 / std::sqrt(2.0), 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(balanced.beta - Complex(1 / std::sqrt(2.0), 0)), 0.0, 1e-15);
  const auto product = chip::source_state(kPi, 0, 0.4, 3000, 3000);
  EXPECT_NEAR(std::abs(product.alpha - std::polar(1.0, 0.4)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(product.beta), 0.0, 1e-15);
  const auto weighted = chip::source_state(kPi, kPi, 0, 700, 300);
  EXPECT_NEAR(std::norm(weighted.alpha), 0.7, 1e-12);
  EXPECT_NEAR(std::norm(weighted.beta), 0.3, 1e-12);
  EXPECT_THROW(chip::source_state(0, 0, 0, 3000, 3000), InvalidArgument);
}

TEST(Source, NormalizedAndTheta8OnlyMovesAlphaPhase) {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const double p1 = rng.uniform(0.5, 6), p2 = rng.uniform(0.5, 6);
    const auto a = chip::source_state(p1, p2, 0, 3000, 2500);
    const auto b = chip::source_state(p1, p2, rng.uniform(-5, 5), 3000, 2500);
    EXPECT_NEAR(std::norm(a.alpha) + std::norm(a.beta), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(a.alpha), std::abs(b.alpha), 1e-15);
    EXPECT_EQ(a.beta, b.beta);
  }
}

TEST(Source, SolvedPhasesGiveRequestedWeight) {
  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const double w = rng.uniform();
    const auto ph = chip::solve_source_phases(w, 3000, 2000);
    const auto s = chip::source_state(ph.phi1, ph.phi2, 0, 3000, 2000);
    EXPECT_NEAR(std::norm(s.beta), w, 1e-12);
  }
}

TEST(Prepare, TrivialConfigurations) {
  const chip::EquivalentCircuit c;
  EXPECT_TRUE(equal_up_to_phase(chip::prepare_state(c), PureState::basis(2, 0)));
  chip::EquivalentCircuit bell;
  bell.source_rotation = kPi / 2;
  const PureState s = chip::prepare_state(bell);
  EXPECT_NEAR(std::abs(s[0]), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(s[3]), 1 / std::sqrt(2.0), 1e-15);
}

TEST(Prepare, ConstructiveRecipe) {
  const ProbVector target{0.1, 0.2, 0.3, 0.4};
  const ProbVector p = born_probabilities(chip::prepare_state(chip::circuit_for_probabilities(target)));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[i], target[i], 1e-9);
}

TEST(Prepare, ThousandRandomTargets) {
  Rng rng(7);
  for (int k = 0; k < 1000; ++k) {
    const ProbVector target = test::random_prob(rng);
    const PureState s = chip::prepare_state(chip::circuit_for_probabilities(target));
    ASSERT_NEAR(s.amplitudes().norm(), 1.0, 1e-12);
    ASSERT_LT((born_probabilities(s).values() - target.values()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Prepare, HardwareConfigurationRealizesCircuit) {
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    chip::EquivalentCircuit c;
    c.source_rotation = rng.uniform(0, kPi);
    c.v = random_unitary(rng);
    c.u = random_unitary(rng);
    c.control_gate = ry(rng.uniform(-3, 3)) * rz(rng.uniform(-3, 3));
    c.target_gate = random_unitary(rng);
    const chip::ChipConfiguration config = chip::configure_chip(c);
    EXPECT_TRUE(equal_up_to_phase(chip::prepare_state(config), chip::prepare_state(c), 1e-9));
  }
}

TEST(Prepare, ReachesArbitraryPureStates) {
  // Arbitrary two-qubit states via the Schmidt form: local unitaries on both
  // qubits around a weighted entangled source.
  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    const PureState target = test::random_state(rng, 2);
    Eigen::Matrix2cd m;
    m << target[0], target[1], target[2], target[3];
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double s0 = svd.singularValues()(0), s1 = svd.singularValues()(1);
    chip::EquivalentCircuit c;
    c.source_rotation = 2 * std::atan2(s1, s0);
    c.control_gate = Unitary(Eigen::MatrixXcd(svd.matrixU()), 1e-10);
    c.target_gate = Unitary(Eigen::MatrixXcd(svd.matrixV().conjugate()), 1e-10);
    EXPECT_TRUE(equal_up_to_phase(chip::prepare_state(c), target, 1e-9));
  }
}

TEST(ChipConfig, ShifterRules) {
  chip::ChipConfiguration config;
  config.set_shifter(chip::shifter::kVY, 0.5);
  EXPECT_EQ(config.shifter(chip::shifter::kVY), 0.5);
  EXPECT_EQ(config.shifter(chip::shifter::kBroken), 0.0);
  EXPECT_THROW(config.set_shifter(chip::shifter::kBroken, 1.0), InvalidArgument);
  EXPECT_THROW(config.set_shifter(0, 1.0), InvalidArgument);
  EXPECT_THROW(config.set_shifter(15, 1.0), InvalidArgument);
  EXPECT_THROW(config.set_shifter(1, std::nan("")), InvalidArgument);
  const Eigen::MatrixXcd a = chip::ChipConfiguration::default_broken_unitary().matrix();
  EXPECT_EQ(a, chip::ChipConfiguration().broken_unitary().matrix());
}

TEST(Compensation, IdentityBroken) {
  const auto a = chip::compensate_broken_shifter(Unitary::identity(2));
  const Eigen::Matrix2cd total = rz(a.theta10).matrix() * ry(a.theta9).matrix() * rz(a.theta8).matrix();
  EXPECT_LT(phase_distance(total, Eigen::Matrix2cd::Identity()), 1e-12);
  EXPECT_NEAR(a.theta9, 0.0, 1e-12);
}

TEST(Compensation, DiagonalBroken) {
  const auto a = chip::compensate_broken_shifter(rz(0.7));
  EXPECT_NEAR(a.theta8, -0.7, 1e-12);
  const Eigen::Matrix2cd total =
      rz(0.7).matrix() * rz(a.theta10).matrix() * ry(a.theta9).matrix() * rz(a.theta8).matrix();
  EXPECT_LT(phase_distance(total, Eigen::Matrix2cd::Identity()), 1e-12);
}

TEST(Compensation, ThousandRandomBrokenUnitaries) {
  Rng rng(10);
  for (int k = 0; k < 1000; ++k) {
    const Unitary u = random_unitary(rng);
    const auto a = chip::compensate_broken_shifter(u);
    const Eigen::Matrix2cd total = u.matrix() * rz(a.theta10).matrix() * ry(a.theta9).matrix() * rz(a.theta8).matrix();
    ASSERT_LT(phase_distance(total, Eigen::Matrix2cd::Identity()), 1e-9);
  }
}

TEST(Compensation, OffsetsGiveRyRzUpToLeftRz) {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const Unitary u = random_unitary(rng);
    const auto a = chip::compensate_broken_shifter(u);
    const double d8 = rng.uniform(-3, 3), d9 = rng.uniform(-3, 3);
    const Eigen::Matrix2cd total = u.matrix() * rz(a.theta10).matrix() * ry(a.theta9 + d9).matrix() *
                                   rz(a.theta8 + d8).matrix();
    const Eigen::Matrix2cd effective = ry(d9).matrix() * rz(a.theta8 + d8).matrix();
    EXPECT_LT(phase_distance(rz(a.theta8).matrix() * total, effective), 1e-9);
  }
}

TEST(Compensation, RejectsNonUnitary) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  m(0, 1) = 0.5;
  EXPECT_THROW(chip::compensate_broken_shifter(m), InvalidArgument);
}
