#include <cmath>

#include "qgan/error.hpp"
#include "qgan/gan.hpp"

namespace qgan::gan {

ProbVector encoded_distribution(const Eigen::Vector2d& g, const Eigen::Vector3d& theta_q) {
  if (!g.allFinite() || !theta_q.allFinite()) throw InvalidArgument("hybrid_generator: non-finite angle");
  PureState psi = apply_single(PureState::basis(2, 0), ry(g(0) + theta_q(0)), 0);
  psi = apply_single(psi, ry(g(1)), 1);
  psi = controlled_pair(psi, ry(theta_q(1)), ry(theta_q(2)));
  return born_probabilities(psi);
}

ProbVector hybrid_generator(const nn::DenseNetwork& head, const Eigen::Vector3d& theta_q, const Eigen::Vector2d& z) {
  if (head.input_size() != 2 || head.output_size() != 2) {
    throw InvalidArgument("hybrid_generator: classical head must map 2 inputs to 2 outputs");
  }
  const Eigen::VectorXd g = head.forward(z);
  return encoded_distribution(Eigen::Vector2d(g(0), g(1)), theta_q);
}

namespace {

Eigen::Vector2d draw_noise(Rng& rng) {
  const double a = rng.uniform();
  const double b = rng.uniform();
  return {a, b};
}

}  // namespace

ImageResult train_images(const ImageGanConfig& config, std::span<const ProbVector> dataset, std::uint64_t seed) {
  HybridGenerator g;
  g.head = nn::DenseNetwork::random(config.head_layers, derive_seed(seed, 4), config.leaky_slope);
  Rng rng(seed);
  for (int k = 0; k < 3; ++k) g.theta_q(k) = rng.normal(0.0, config.init_std);
  return train_images(config, dataset, seed, std::move(g));
}

ImageResult train_images(const ImageGanConfig& config, std::span<const ProbVector> dataset, std::uint64_t seed,
                         HybridGenerator initial) {
  if (dataset.empty()) throw InvalidArgument("train_images: dataset is empty");
  for (const auto& p : dataset)
    if (p.size() != 4) throw InvalidArgument("train_images: dataset entries must be 4-point distributions");
  if (config.batch_size < 1 || config.epochs < 0 || config.c_steps < 1) {
    throw InvalidArgument("train_images: bad batch size or schedule");
  }
  if (config.eval_noise_count < 1 || config.sample_count < 0) throw InvalidArgument("train_images: bad bank sizes");

  ImageResult result;
  result.history.seed = seed;
  result.history.metric_name = "kld";
  result.generator = std::move(initial);
  result.critic = nn::DenseNetwork::random(config.critic_layers, derive_seed(seed, 2), config.leaky_slope);
  Rng rng(derive_seed(seed, 3));

  const ProbVector data_mean = mean_distribution(dataset);
  std::vector<Eigen::Vector2d> eval_noise;
  {
    Rng eval_rng(derive_seed(seed, 5));
    for (int i = 0; i < config.eval_noise_count; ++i) eval_noise.push_back(draw_noise(eval_rng));
  }

  auto& head = result.generator.head;
  auto& theta_q = result.generator.theta_q;
  nn::OptimizerState critic_opt(result.critic.parameter_count(), config.rmsprop_beta);
  nn::OptimizerState head_opt(head.parameter_count(), config.rmsprop_beta);
  nn::OptimizerState quantum_opt(3, config.rmsprop_beta);
  const int n = config.batch_size;
  double last_critic_loss = 0.0;

  auto generated_mean = [&]() {
    std::vector<ProbVector> bank;
    bank.reserve(eval_noise.size());
    for (const auto& z : eval_noise) bank.push_back(hybrid_generator(head, theta_q, z));
    return mean_distribution(bank);
  };

  auto snapshot = [&]() {
    const Eigen::VectorXd h = head.parameters();
    std::vector<double> out(h.data(), h.data() + h.size());
    out.insert(out.end(), theta_q.data(), theta_q.data() + 3);
    return out;
  };

  auto record = [&](int epoch, double loss_g) {
    const double metric = kld(data_mean, generated_mean());
    if (!std::isfinite(loss_g) || !std::isfinite(last_critic_loss) || !std::isfinite(metric)) {
      result.history.aborted = true;
      result.history.diagnostic = "non-finite loss or KLD at epoch " + std::to_string(epoch);
      return false;
    }
    result.history.records.push_back({epoch, loss_g, last_critic_loss, metric, snapshot()});
    return true;
  };

  // Mean critic score of the generator over a fixed noise batch.
  auto generator_loss = [&](const nn::DenseNetwork& h, const Eigen::Vector3d& tq, const std::vector<Eigen::Vector2d>& zs) {
    double total = 0.0;
    for (const auto& z : zs) total -= result.critic.forward(hybrid_generator(h, tq, z).values())(0);
    return total / static_cast<double>(zs.size());
  };

  {
    std::vector<Eigen::Vector2d> zs;
    for (int i = 0; i < n; ++i) zs.push_back(draw_noise(rng));
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& x = dataset[rng.below(dataset.size())];
      c += result.critic.forward(hybrid_generator(head, theta_q, zs[i]).values())(0) - result.critic.forward(x.values())(0);
    }
    last_critic_loss = c / n;
    if (!record(0, generator_loss(head, theta_q, zs))) return result;
  }

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    // Critic: minibatch WGAN-GP descent, averaged over the batch.
    double critic_loss_sum = 0.0;
    for (int k = 0; k < config.c_steps; ++k) {
      Eigen::VectorXd grads = Eigen::VectorXd::Zero(result.critic.parameter_count());
      double loss = 0.0;
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd real = dataset[rng.below(dataset.size())].values();
        const Eigen::VectorXd fake = hybrid_generator(head, theta_q, draw_noise(rng)).values();
        const double zeta = rng.uniform();
        loss += result.critic.forward(fake)(0) - result.critic.forward(real)(0);
        grads += nn::backward(result.critic, fake).parameters - nn::backward(result.critic, real).parameters;
        if (config.lambda > 0.0) {
          const nn::PenaltyResult gp = nn::gradient_penalty(result.critic, real, fake, zeta);
          loss += config.lambda * gp.penalty;
          grads += config.lambda * gp.parameter_gradients;
        }
      }
      loss /= n;
      grads /= n;
      critic_loss_sum += loss;
      if (!grads.allFinite()) {
        result.history.aborted = true;
        result.history.diagnostic = "non-finite critic gradient at epoch " + std::to_string(epoch);
        return result;
      }
      nn::rmsprop_step(result.critic, grads, critic_opt, config.lr_c);
    }
    last_critic_loss = critic_loss_sum / config.c_steps;

    // Generator: one step on a fresh noise batch.
    std::vector<Eigen::Vector2d> zs;
    for (int i = 0; i < n; ++i) zs.push_back(draw_noise(rng));

    // Quantum angles: chain rule through the critic's input gradient with
    // parameter-shift derivatives of each generated distribution.
    Eigen::Vector3d grad_q = Eigen::Vector3d::Zero();
    for (const auto& z : zs) {
      const Eigen::VectorXd gz = head.forward(z);
      const Eigen::Vector2d g(gz(0), gz(1));
      const Eigen::VectorXd p = encoded_distribution(g, theta_q).values();
      const Eigen::VectorXd dd_dp = nn::backward(result.critic, p).input;
      for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d up = theta_q, down = theta_q;
        up(k) += std::numbers::pi / 2;
        down(k) -= std::numbers::pi / 2;
        const Eigen::VectorXd dp = (encoded_distribution(g, up).values() - encoded_distribution(g, down).values()) / 2.0;
        grad_q(k) -= dd_dp.dot(dp);
      }
    }
    grad_q /= n;

    // Classical head: central differences of the batch loss.
    const Eigen::Vector3d tq_now = theta_q;
    const Eigen::VectorXd grad_nn = finite_difference_grad(
        [&](const Eigen::VectorXd& params) {
          nn::DenseNetwork probe = head;
          probe.set_parameters(params);
          return generator_loss(probe, tq_now, zs);
        },
        head.parameters(), config.fd_epsilon);

    if (!grad_q.allFinite() || !grad_nn.allFinite()) {
      result.history.aborted = true;
      result.history.diagnostic = "non-finite generator gradient at epoch " + std::to_string(epoch);
      return result;
    }
    Eigen::VectorXd tq = theta_q;
    nn::rmsprop_step(tq, grad_q, quantum_opt, config.lr_q);
    theta_q = tq;
    nn::rmsprop_step(head, grad_nn, head_opt, config.lr_nn);

    if (!record(epoch, generator_loss(head, theta_q, zs))) return result;
  }

  Rng sample_rng(derive_seed(seed, 6));
  for (int i = 0; i < config.sample_count; ++i) result.samples.push_back(hybrid_generator(head, theta_q, draw_noise(sample_rng)));
  return result;
}

}  // namespace qgan::gan
