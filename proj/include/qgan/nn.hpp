#pragma once

// Small fully connected networks with Leaky ReLU hidden layers and a linear
// output layer, used for the WGAN-GP critic and the classical head of the
// hybrid generator.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace qgan::nn {

inline constexpr double kDefaultSlope = 0.01;

class DenseNetwork {
 public:
  /// All weights and biases zero. Every layer size must be positive and there
  /// must be at least two layers.
  explicit DenseNetwork(std::vector<int> layer_sizes, double slope = kDefaultSlope);

  /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static DenseNetwork random(std::vector<int> layer_sizes, std::uint64_t seed,
                             double slope = kDefaultSlope);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  /// Number of affine layers.
  int depth() const { return static_cast<int>(weights_.size()); }
  double slope() const { return slope_; }
  std::uint64_t init_seed() const { return seed_; }
  void set_init_seed(std::uint64_t seed) { seed_ = seed; }

  /// Shape (layer_sizes[l+1], layer_sizes[l]).
  const Eigen::MatrixXd& weights(int layer) const { return weights_.at(layer); }
  const Eigen::VectorXd& biases(int layer) const { return biases_.at(layer); }
  void set_layer(int layer, Eigen::MatrixXd w, Eigen::VectorXd b);

  /// Flattened as, per layer, weights row-major then biases.
  int parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

 private:
  std::vector<int> sizes_;
  double slope_;
  std::uint64_t seed_ = 0;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Leaky ReLU derivative; a pre-activation of exactly 0 takes the negative
/// slope.
inline double leaky_relu_derivative(double z, double slope) { return z > 0.0 ? 1.0 : slope; }

struct Gradients {
  Eigen::VectorXd parameters;  ///< same layout as DenseNetwork::parameters()
  Eigen::VectorXd input;
};

/// Reverse-mode gradients of upstream . forward(x).
Gradients backward(const DenseNetwork& net, const Eigen::VectorXd& x, const Eigen::VectorXd& upstream);

/// Gradients of a scalar-output network.
Gradients backward(const DenseNetwork& net, const Eigen::VectorXd& x);

struct OptimizerState {
  OptimizerState(int parameter_count, double beta = 0.9, double eps = 1e-8);

  Eigen::VectorXd mean_square;
  double beta;
  double eps;
};

/// s <- beta s + (1 - beta) g^2;  p <- p - lr g / (sqrt(s) + eps).
void rmsprop_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, OptimizerState& state, double lr);
void rmsprop_step(DenseNetwork& net, const Eigen::VectorXd& grads, OptimizerState& state, double lr);

struct PenaltyResult {
  double penalty = 0.0;
  Eigen::VectorXd parameter_gradients;
  Eigen::VectorXd interpolate;
};

/// WGAN-GP term (|grad_x D(x_hat)|_2 - 1)^2 at x_hat = x_real + zeta (x_fake - x_real).
/// Parameter gradients are central differences with step `fd_step`.
PenaltyResult gradient_penalty(const DenseNetwork& critic, const Eigen::VectorXd& x_real,
                               const Eigen::VectorXd& x_fake, double zeta, double fd_step = 1e-6);

}  // namespace qgan::nn
