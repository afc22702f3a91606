#include "qgan/nn.hpp"

#include <cmath>
#include <string>

#include "qgan/error.hpp"
#include "qgan/rng.hpp"

namespace qgan::nn {

DenseNetwork::DenseNetwork(std::vector<int> layer_sizes, double slope)
    : sizes_(std::move(layer_sizes)), slope_(slope) {
  if (sizes_.size() < 2) throw InvalidArgument("DenseNetwork: at least two layer sizes required");
  for (int s : sizes_)
    if (s <= 0) throw InvalidArgument("DenseNetwork: layer sizes must be positive");
  if (!std::isfinite(slope_)) throw InvalidArgument("DenseNetwork: slope must be finite");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

DenseNetwork DenseNetwork::random(std::vector<int> layer_sizes, std::uint64_t seed, double slope) {
  DenseNetwork net(std::move(layer_sizes), slope);
  net.seed_ = seed;
  Rng rng(seed);
  for (int l = 0; l < net.depth(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    auto& w = net.weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    for (Eigen::Index r = 0; r < net.biases_[l].size(); ++r) net.biases_[l](r) = rng.uniform(-bound, bound);
  }
  return net;
}

void DenseNetwork::set_layer(int layer, Eigen::MatrixXd w, Eigen::VectorXd b) {
  if (layer < 0 || layer >= depth()) throw InvalidArgument("set_layer: layer index out of range");
  if (w.rows() != weights_[layer].rows() || w.cols() != weights_[layer].cols() ||
      b.size() != biases_[layer].size()) {
    throw InvalidArgument("set_layer: shape mismatch");
  }
  if (!w.allFinite() || !b.allFinite()) throw InvalidArgument("set_layer: non-finite parameter");
  weights_[layer] = std::move(w);
  biases_[layer] = std::move(b);
}

int DenseNetwork::parameter_count() const {
  int n = 0;
  for (int l = 0; l < depth(); ++l) n += static_cast<int>(weights_[l].size() + biases_[l].size());
  return n;
}

Eigen::VectorXd DenseNetwork::parameters() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index k = 0;
  for (int l = 0; l < depth(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) flat(k++) = weights_[l](r, c);
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) flat(k++) = biases_[l](r);
  }
  return flat;
}

void DenseNetwork::set_parameters(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) {
    throw InvalidArgument("set_parameters: expected " + std::to_string(parameter_count()) + " values");
  }
  if (!flat.allFinite()) throw InvalidArgument("set_parameters: non-finite parameter");
  Eigen::Index k = 0;
  for (int l = 0; l < depth(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = flat(k++);
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l](r) = flat(k++);
  }
}

Eigen::VectorXd DenseNetwork::forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_size()) {
    throw InvalidArgument("forward: input has " + std::to_string(x.size()) + " entries, expected " +
                          std::to_string(input_size()));
  }
  Eigen::VectorXd a = x;
  for (int l = 0; l < depth(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    if (l + 1 < depth()) {
      for (Eigen::Index i = 0; i < z.size(); ++i)
        if (!(z(i) > 0.0)) z(i) *= slope_;
    }
    a = std::move(z);
  }
  return a;
}

Gradients backward(const DenseNetwork& net, const Eigen::VectorXd& x, const Eigen::VectorXd& upstream) {
  if (x.size() != net.input_size()) throw InvalidArgument("backward: input shape mismatch");
  if (upstream.size() != net.output_size()) throw InvalidArgument("backward: upstream shape mismatch");
  const int depth = net.depth();
  std::vector<Eigen::VectorXd> inputs(depth);  // activation entering each layer
  std::vector<Eigen::VectorXd> pre(depth);
  Eigen::VectorXd a = x;
  for (int l = 0; l < depth; ++l) {
    inputs[l] = a;
    pre[l] = net.weights(l) * a + net.biases(l);
    a = pre[l];
    if (l + 1 < depth) {
      for (Eigen::Index i = 0; i < a.size(); ++i)
        if (!(a(i) > 0.0)) a(i) *= net.slope();
    }
  }

  std::vector<Eigen::MatrixXd> dw(depth);
  std::vector<Eigen::VectorXd> db(depth);
  Eigen::VectorXd delta = upstream;  // d out / d pre[l]
  for (int l = depth - 1; l >= 0; --l) {
    if (l + 1 < depth) {
      for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) *= leaky_relu_derivative(pre[l](i), net.slope());
    }
    dw[l] = delta * inputs[l].transpose();
    db[l] = delta;
    delta = net.weights(l).transpose() * delta;
  }

  Gradients g;
  g.input = delta;
  g.parameters.resize(net.parameter_count());
  Eigen::Index k = 0;
  for (int l = 0; l < depth; ++l) {
    for (Eigen::Index r = 0; r < dw[l].rows(); ++r)
      for (Eigen::Index c = 0; c < dw[l].cols(); ++c) g.parameters(k++) = dw[l](r, c);
    for (Eigen::Index r = 0; r < db[l].size(); ++r) g.parameters(k++) = db[l](r);
  }
  return g;
}

Gradients backward(const DenseNetwork& net, const Eigen::VectorXd& x) {
  if (net.output_size() != 1) throw InvalidArgument("backward: scalar-output network required");
  return backward(net, x, Eigen::VectorXd::Ones(1));
}

OptimizerState::OptimizerState(int parameter_count, double beta_, double eps_)
    : mean_square(Eigen::VectorXd::Zero(parameter_count)), beta(beta_), eps(eps_) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("OptimizerState: beta must lie in (0, 1)");
  if (!(eps > 0.0)) throw InvalidArgument("OptimizerState: eps must be positive");
}

void rmsprop_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, OptimizerState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.mean_square.size()) {
    throw InvalidArgument("rmsprop_step: shape mismatch");
  }
  state.mean_square = state.beta * state.mean_square + (1.0 - state.beta) * grads.cwiseAbs2();
  params.array() -= lr * grads.array() / (state.mean_square.array().sqrt() + state.eps);
}

void rmsprop_step(DenseNetwork& net, const Eigen::VectorXd& grads, OptimizerState& state, double lr) {
  Eigen::VectorXd p = net.parameters();
  rmsprop_step(p, grads, state, lr);
  net.set_parameters(p);
}

namespace {

double penalty_at(const DenseNetwork& critic, const Eigen::VectorXd& x_hat) {
  const double norm = backward(critic, x_hat).input.norm();
  return (norm - 1.0) * (norm - 1.0);
}

}  // namespace

PenaltyResult gradient_penalty(const DenseNetwork& critic, const Eigen::VectorXd& x_real,
                               const Eigen::VectorXd& x_fake, double zeta, double fd_step) {
  if (x_real.size() != critic.input_size() || x_fake.size() != critic.input_size()) {
    throw InvalidArgument("gradient_penalty: sample shape mismatch");
  }
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw InvalidArgument("gradient_penalty: zeta must lie in [0, 1]");
  PenaltyResult out;
  out.interpolate = x_real + zeta * (x_fake - x_real);
  out.penalty = penalty_at(critic, out.interpolate);

  DenseNetwork probe = critic;
  const Eigen::VectorXd base = critic.parameters();
  out.parameter_gradients.resize(base.size());
  Eigen::VectorXd shifted = base;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    shifted(i) = base(i) + fd_step;
    probe.set_parameters(shifted);
    const double up = penalty_at(probe, out.interpolate);
    shifted(i) = base(i) - fd_step;
    probe.set_parameters(shifted);
    const double down = penalty_at(probe, out.interpolate);
    shifted(i) = base(i);
    out.parameter_gradients(i) = (up - down) / (2.0 * fd_step);
  }
  return out;
}

}  // namespace qgan::nn
