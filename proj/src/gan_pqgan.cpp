#include <algorithm>
#include <cmath>

#include "qgan/error.hpp"
#include "qgan/gan.hpp"

namespace qgan::gan {

namespace {

std::vector<double> snapshot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  std::vector<double> out(a.data(), a.data() + a.size());
  out.insert(out.end(), b.data(), b.data() + b.size());
  return out;
}

// tr(M rho) for a projector M, exactly or as a finite-shot frequency.
double measured(const Eigen::Matrix2cd& m, const DensityMatrix& rho, tomo::Shots shots, Rng& rng) {
  const double p = std::clamp(expectation(m, rho), 0.0, 1.0);
  if (!shots) return p;
  const auto counts = sample_counts(ProbVector{p, 1.0 - p}, *shots, rng);
  return static_cast<double>(counts[0]) / static_cast<double>(*shots);
}

}  // namespace

chip::EquivalentCircuit pqgan_circuit(const Eigen::VectorXd& theta_g) {
  if (theta_g.size() != kPqGeneratorParams) throw InvalidArgument("pqgan: generator needs 9 phases");
  chip::EquivalentCircuit c;
  c.source_rotation = 2.0 * theta_g(0);
  c.v = su2(theta_g(1), theta_g(2), theta_g(3));
  c.u = su2(theta_g(4), theta_g(5), theta_g(6));
  c.target_gate = ry(theta_g(8)) * rz(theta_g(7));
  return c;
}

DensityMatrix pqgan_generator(const Eigen::VectorXd& theta_g) {
  const PureState psi = chip::prepare_state(pqgan_circuit(theta_g));
  return partial_trace(DensityMatrix::from_pure(psi), 1);
}

Eigen::Matrix2cd pqgan_measurement(const Eigen::VectorXd& theta_d) {
  if (theta_d.size() != kPqDiscriminatorParams) throw InvalidArgument("pqgan: discriminator needs 3 phases");
  const Unitary ud = su2(theta_d(0), theta_d(1), theta_d(2));
  Eigen::Matrix2cd projector = Eigen::Matrix2cd::Zero();
  projector(0, 0) = 1.0;
  return ud.matrix().adjoint() * projector * ud.matrix();
}

double pqgan_loss(const Eigen::VectorXd& theta_g, const Eigen::VectorXd& theta_d, const DensityMatrix& sigma) {
  const Eigen::Matrix2cd m = pqgan_measurement(theta_d);
  return expectation(m, pqgan_generator(theta_g)) - expectation(m, sigma);
}

Eigen::VectorXd pqgan_generator_gradient(const ScalarLoss& loss, const Eigen::VectorXd& theta_g) {
  // Shift in the circuit angle 2 phi, where the loss is first-degree.
  Eigen::VectorXd circuit = theta_g;
  circuit(0) *= 2.0;
  Eigen::VectorXd grad = parameter_shift_gradient(
      [&](const Eigen::VectorXd& c) {
        Eigen::VectorXd t = c;
        t(0) /= 2.0;
        return loss(t);
      },
      circuit);
  grad(0) *= 2.0;
  return grad;
}

PqGanStart pqgan_initial_parameters(const PqGanConfig& config, std::uint64_t seed) {
  Rng rng(config.init_seed.value_or(seed));
  PqGanStart s{Eigen::VectorXd(kPqGeneratorParams), Eigen::VectorXd(kPqDiscriminatorParams)};
  for (Eigen::Index i = 0; i < s.theta_g.size(); ++i) s.theta_g(i) = rng.normal(0.0, config.init_std);
  for (Eigen::Index i = 0; i < s.theta_d.size(); ++i) s.theta_d(i) = rng.normal(0.0, config.init_std);
  return s;
}

PqGanResult train_pqgan(const PqGanConfig& config, const DensityMatrix& sigma, std::uint64_t seed) {
  return train_pqgan(config, sigma, seed, pqgan_initial_parameters(config, seed));
}

PqGanResult train_pqgan(const PqGanConfig& config, const DensityMatrix& sigma, std::uint64_t seed,
                        PqGanStart start) {
  if (sigma.qubit_count() != 1) throw InvalidArgument("train_pqgan: single-qubit target required");
  if (config.epochs < 0 || config.d_steps_per_g_step < 1) throw InvalidArgument("train_pqgan: bad schedule");
  if (!(config.lr_g > 0.0 && config.lr_d > 0.0)) throw InvalidArgument("train_pqgan: learning rates must be positive");

  PqGanResult result;
  result.history.seed = seed;
  result.history.metric_name = "fidelity";
  result.theta_g = std::move(start.theta_g);
  result.theta_d = std::move(start.theta_d);
  // Shot noise and tomography draw from a stream separate from initialization.
  Rng noise(derive_seed(seed, 1));

  auto loss_for = [&](const Eigen::VectorXd& tg, const Eigen::VectorXd& td) {
    const Eigen::Matrix2cd m = pqgan_measurement(td);
    return measured(m, pqgan_generator(tg), config.shots, noise) - measured(m, sigma, config.shots, noise);
  };

  auto record = [&](int epoch) {
    const DensityMatrix rho = pqgan_generator(result.theta_g);
    const DensityMatrix seen = tomo::reconstruct(tomo::measure_all(rho, config.shots, noise));
    const double loss = loss_for(result.theta_g, result.theta_d);
    const double fid = fidelity(seen, sigma);
    if (!std::isfinite(loss) || !std::isfinite(fid)) {
      result.history.aborted = true;
      result.history.diagnostic = "non-finite loss or fidelity";
      return false;
    }
    // D maximizes the loss, so its own loss is the negative.
    result.history.records.push_back({epoch, loss, -loss, fid, snapshot(result.theta_g, result.theta_d)});
    if (fid > result.best_fidelity) {
      result.best_fidelity = fid;
      result.best_epoch = epoch;
    }
    return true;
  };

  if (!record(0)) return result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (int k = 0; k < config.d_steps_per_g_step; ++k) {
      const Eigen::VectorXd tg = result.theta_g;
      const Eigen::VectorXd grad =
          parameter_shift_gradient([&](const Eigen::VectorXd& td) { return loss_for(tg, td); }, result.theta_d);
      result.theta_d += config.lr_d * grad;
    }
    if (config.train_generator) {
      const Eigen::VectorXd td = result.theta_d;
      const Eigen::VectorXd grad =
          pqgan_generator_gradient([&](const Eigen::VectorXd& tg) { return loss_for(tg, td); }, result.theta_g);
      result.theta_g -= config.lr_g * grad;
    }
    if (!result.theta_g.allFinite() || !result.theta_d.allFinite()) {
      result.history.aborted = true;
      result.history.diagnostic = "non-finite parameters at epoch " + std::to_string(epoch);
      return result;
    }
    if (!record(epoch)) return result;
  }
  return result;
}

}  // namespace qgan::gan
