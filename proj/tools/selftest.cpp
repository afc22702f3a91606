#include "selftest.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "qgan/chip.hpp"
#include "qgan/data.hpp"
#include "qgan/error.hpp"
#include "qgan/gan.hpp"
#include "qgan/nn.hpp"
#include "qgan/qcore.hpp"
#include "qgan/tomography.hpp"

namespace qgan::cli {

namespace {

constexpr double kPi = std::numbers::pi;

ProbVector random_prob(Rng& rng) {
  Eigen::VectorXd v(4);
  for (int i = 0; i < 4; ++i) v(i) = -std::log(1.0 - rng.uniform());
  return ProbVector(Eigen::VectorXd(v / v.sum()));
}

bool unitarity() {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Unitary u = random_unitary(rng);
    if ((u.matrix().adjoint() * u.matrix() - Eigen::Matrix2cd::Identity()).norm() > 1e-12) return false;
  }
  return true;
}

bool zyz_roundtrip() {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Unitary u = random_unitary(rng);
    const Eigen::Matrix2cd m = su2(zyz_decompose(u)).matrix();
    const std::complex<double> phase = (m.adjoint() * u.matrix()).trace() / 2.0;
    if ((u.matrix() - phase * m).norm() > 1e-10) return false;
  }
  return true;
}

bool coincidence_law() {
  for (int k = 0; k <= 6283; ++k) {
    const double phi = k * 1e-3;
    const double s = std::sin(phi / 2);
    if (std::abs(chip::derive_coincidence_from_state(phi, chip::Port::kA) - s * s * s * s) > 1e-12) return false;
  }
  return true;
}

bool chip_reaches_probabilities() {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const ProbVector p = random_prob(rng);
    const ProbVector q = born_probabilities(chip::prepare_state(chip::circuit_for_probabilities(p)));
    if ((p.values() - q.values()).cwiseAbs().maxCoeff() > 1e-9) return false;
  }
  return true;
}

bool broken_shifter_compensation() {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Unitary u = random_unitary(rng);
    const auto a = chip::compensate_broken_shifter(u);
    const Eigen::Matrix2cd total = u.matrix() * rz(a.theta10).matrix() * ry(a.theta9).matrix() * rz(a.theta8).matrix();
    const std::complex<double> phase = total.trace() / 2.0;
    if ((total - phase * Eigen::Matrix2cd::Identity()).norm() > 1e-9) return false;
  }
  return true;
}

bool partial_trace_and_fidelity() {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const ProbVector p = random_prob(rng);
    const auto rho = DensityMatrix::from_pure(chip::prepare_state(chip::circuit_for_probabilities(p)));
    for (int keep = 0; keep < 2; ++keep) {
      const auto r = partial_trace(rho, keep);
      if (std::abs(r.entries().trace().real() - 1.0) > 1e-12) return false;
      if (std::abs(fidelity(r, r) - 1.0) > 1e-9) return false;
    }
  }
  return true;
}

bool tomography_exact() {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto psi = apply_single(PureState::basis(1, 0), random_unitary(rng), 0);
    if (tomo::tomography_roundtrip(DensityMatrix::from_pure(psi), tomo::kExact, 1) < 1.0 - 1e-9) return false;
  }
  return true;
}

bool parameter_shift_matches_fd() {
  Rng rng(7);
  Eigen::Matrix2cd m;
  m << 0.7, 0.0, 0.0, 0.3;
  const DensityMatrix sigma(m);
  Eigen::VectorXd tg(gan::kPqGeneratorParams), td(gan::kPqDiscriminatorParams);
  for (int i = 0; i < tg.size(); ++i) tg(i) = rng.uniform(-kPi, kPi);
  for (int i = 0; i < td.size(); ++i) td(i) = rng.uniform(-kPi, kPi);
  const auto loss = [&](const Eigen::VectorXd& t) { return gan::pqgan_loss(t, td, sigma); };
  const Eigen::VectorXd ps = gan::pqgan_generator_gradient(loss, tg);
  const Eigen::VectorXd fd = gan::finite_difference_grad(loss, tg, 1e-5);
  return (ps - fd).cwiseAbs().maxCoeff() < 1e-6;
}

bool backprop_matches_fd() {
  const nn::DenseNetwork net = nn::DenseNetwork::random({4, 5, 3, 1}, 8);
  Eigen::VectorXd x(4);
  x << 0.1, 0.2, 0.3, 0.4;
  const Eigen::VectorXd g = nn::backward(net, x).parameters;
  const Eigen::VectorXd theta = net.parameters();
  const Eigen::VectorXd fd = gan::finite_difference_grad(
      [&](const Eigen::VectorXd& t) {
        nn::DenseNetwork probe = net;
        probe.set_parameters(t);
        return probe.forward(x)(0);
      },
      theta, 1e-6);
  return (g - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff());
}

bool distribution_inversion() {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const ProbVector p = random_prob(rng);
    const ProbVector q = gan::distribution_generator(gan::invert_distribution_generator(p));
    if ((p.values() - q.values()).cwiseAbs().maxCoeff() > 1e-9) return false;
  }
  return true;
}

bool feature_map_roundtrip() {
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d x(rng.uniform(), rng.uniform(), rng.uniform());
    if ((data::prob_to_normalized(data::normalized_to_prob(x)) - x).cwiseAbs().maxCoeff() > 1e-10) return false;
  }
  return true;
}

bool targets_valid() {
  for (const char* name : {"normal", "lognormal", "bimodal"}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ProbVector p = data::build_target(data::DistributionSpec::named(name), seed);
      if (std::abs(p.values().sum() - 1.0) > 1e-12) return false;
    }
  }
  return true;
}

bool kld_nonnegative() {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    if (gan::kld(random_prob(rng), random_prob(rng)) < 0.0) return false;
  }
  const ProbVector p = random_prob(rng);
  return std::abs(gan::kld(p, p)) < 1e-12;
}

bool training_deterministic() {
  gan::HqcGanConfig config;
  config.epochs = 5;
  const ProbVector target{0.1, 0.2, 0.3, 0.4};
  const auto a = gan::train_distribution(config, target, 12);
  const auto b = gan::train_distribution(config, target, 12);
  if (a.history.records.size() != b.history.records.size()) return false;
  for (std::size_t i = 0; i < a.history.records.size(); ++i) {
    if (a.history.records[i].metric != b.history.records[i].metric ||
        a.history.records[i].loss_d != b.history.records[i].loss_d) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::vector<std::pair<const char*, std::function<bool()>>> checks{
      {"random unitaries are unitary", unitarity},
      {"ZYZ decomposition round-trips", zyz_roundtrip},
      {"coincidence law sin^4(phi/2)", coincidence_law},
      {"chip reaches random probability vectors", chip_reaches_probabilities},
      {"broken-shifter compensation", broken_shifter_compensation},
      {"partial trace and self-fidelity", partial_trace_and_fidelity},
      {"exact tomography round-trip", tomography_exact},
      {"parameter shift matches finite differences", parameter_shift_matches_fd},
      {"backprop matches finite differences", backprop_matches_fd},
      {"distribution generator inversion", distribution_inversion},
      {"feature/probability map round-trip", feature_map_roundtrip},
      {"targets are valid distributions", targets_valid},
      {"KLD non-negative, zero on equal inputs", kld_nonnegative},
      {"seeded training is deterministic", training_deterministic},
  };
  bool all = true;
  for (const auto& [name, check] : checks) {
    bool ok = false;
    try {
      ok = check();
    } catch (const std::exception& e) {
      out << "  exception: " << e.what() << "\n";
    }
    out << (ok ? "PASS " : "FAIL ") << name << "\n";
    all = all && ok;
  }
  out << (all ? "selftest passed" : "selftest FAILED") << "\n";
  return all;
}

}  // namespace qgan::cli
