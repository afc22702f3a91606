#include <cmath>
#include <numbers>

#include "qgan/error.hpp"
#include "qgan/gan.hpp"

namespace qgan::gan {

ProbVector distribution_generator(const Eigen::Vector3d& theta) {
  if (!theta.allFinite()) throw InvalidArgument("distribution_generator: phases must be finite");
  PureState psi = apply_single(PureState::basis(2, 0), ry(theta(0)), 0);
  psi = controlled_pair(psi, ry(theta(1)), ry(theta(2)));
  return born_probabilities(psi);
}

Eigen::Vector3d invert_distribution_generator(const ProbVector& p) {
  if (p.size() != 4) throw InvalidArgument("invert_distribution_generator: four probabilities required");
  return {2.0 * std::atan2(std::sqrt(p[2] + p[3]), std::sqrt(p[0] + p[1])),
          2.0 * std::atan2(std::sqrt(p[1]), std::sqrt(p[0])),
          2.0 * std::atan2(std::sqrt(p[3]), std::sqrt(p[2]))};
}

Eigen::Matrix<double, 4, 3> distribution_jacobian(const Eigen::Vector3d& theta) {
  Eigen::Matrix<double, 4, 3> j;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d up = theta, down = theta;
    up(k) += std::numbers::pi / 2;
    down(k) -= std::numbers::pi / 2;
    j.col(k) = (distribution_generator(up).values() - distribution_generator(down).values()) / 2.0;
  }
  return j;
}

DistributionResult train_distribution(const HqcGanConfig& config, const ProbVector& target, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::Vector3d theta;
  for (int k = 0; k < 3; ++k) theta(k) = rng.normal(0.0, config.init_std);
  return train_distribution(config, target, seed, theta);
}

DistributionResult train_distribution(const HqcGanConfig& config, const ProbVector& target, std::uint64_t seed,
                                      const Eigen::Vector3d& initial_theta) {
  if (target.size() != 4) throw InvalidArgument("train_distribution: 4-point target required");
  if (config.epochs < 0 || config.c_steps < 1) throw InvalidArgument("train_distribution: bad schedule");
  if (!(config.lambda >= 0.0)) throw InvalidArgument("train_distribution: lambda must be non-negative");
  if (config.critic_layers.empty() || config.critic_layers.front() != 4 || config.critic_layers.back() != 1) {
    throw InvalidArgument("train_distribution: critic must map 4 inputs to 1 output");
  }

  DistributionResult result;
  result.history.seed = seed;
  result.history.metric_name = "kld";
  result.theta = initial_theta;
  result.critic = nn::DenseNetwork::random(config.critic_layers, derive_seed(seed, 2), config.leaky_slope);
  Rng rng(derive_seed(seed, 3));

  nn::OptimizerState critic_opt(result.critic.parameter_count(), config.rmsprop_beta);
  nn::OptimizerState gen_opt(3, config.rmsprop_beta);
  const Eigen::VectorXd real = target.values();
  double last_critic_loss = 0.0;

  auto record = [&](int epoch) {
    const ProbVector generated = distribution_generator(result.theta);
    const double loss_g = -result.critic.forward(generated.values())(0);
    const double metric = kld(target, generated);
    if (!std::isfinite(loss_g) || !std::isfinite(last_critic_loss) || !std::isfinite(metric)) {
      result.history.aborted = true;
      result.history.diagnostic = "non-finite loss or KLD at epoch " + std::to_string(epoch);
      return false;
    }
    result.history.records.push_back(
        {epoch, loss_g, last_critic_loss, metric, {result.theta(0), result.theta(1), result.theta(2)}});
    result.generated = generated;
    return true;
  };

  {
    // Epoch-0 critic loss, without the penalty's random interpolate.
    const Eigen::VectorXd fake = distribution_generator(result.theta).values();
    last_critic_loss = result.critic.forward(fake)(0) - result.critic.forward(real)(0);
  }
  if (!record(0)) return result;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const Eigen::VectorXd fake = distribution_generator(result.theta).values();
    // Critic: descend D(G) - D(x) + lambda * GP.
    for (int k = 0; k < config.c_steps; ++k) {
      const double zeta = rng.uniform();
      Eigen::VectorXd grads = nn::backward(result.critic, fake).parameters - nn::backward(result.critic, real).parameters;
      double loss = result.critic.forward(fake)(0) - result.critic.forward(real)(0);
      if (config.lambda > 0.0) {
        const nn::PenaltyResult gp = nn::gradient_penalty(result.critic, real, fake, zeta);
        loss += config.lambda * gp.penalty;
        grads += config.lambda * gp.parameter_gradients;
      }
      last_critic_loss = loss;
      if (!grads.allFinite()) {
        result.history.aborted = true;
        result.history.diagnostic = "non-finite critic gradient at epoch " + std::to_string(epoch);
        return result;
      }
      nn::rmsprop_step(result.critic, grads, critic_opt, config.lr_c);
    }
    // Generator: descend -D(G(theta)) through the chain rule.
    const Eigen::VectorXd p = distribution_generator(result.theta).values();
    const Eigen::VectorXd dd_dp = nn::backward(result.critic, p).input;
    Eigen::VectorXd grad = -(distribution_jacobian(result.theta).transpose() * dd_dp);
    Eigen::VectorXd theta = result.theta;
    nn::rmsprop_step(theta, grad, gen_opt, config.lr_g);
    result.theta = theta;
    if (!record(epoch)) return result;
  }
  return result;
}

}  // namespace qgan::gan
