#pragma once

// Adversarial training on the chip model: a fully quantum GAN that learns a
// single-qubit state, a hybrid quantum-classical WGAN-GP that loads a 4-point
// distribution, and a hybrid-generator WGAN-GP for compressed images.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgan/chip.hpp"
#include "qgan/nn.hpp"
#include "qgan/qcore.hpp"
#include "qgan/tomography.hpp"

namespace qgan::gan {

struct EpochRecord {
  int epoch = 0;
  double loss_g = 0.0;
  double loss_d = 0.0;
  double metric = 0.0;  ///< fidelity (state learning) or KLD (distributions, images)
  std::vector<double> parameters;
};

/// One record per epoch, with epoch 0 holding the untrained starting point.
/// A run that meets a non-finite value stops, keeps the finite prefix and
/// sets `aborted` with a diagnostic.
struct TrainingHistory {
  std::uint64_t seed = 0;
  std::string metric_name;
  std::vector<EpochRecord> records;
  bool aborted = false;
  std::string diagnostic;
};

// ---- Gradient estimators ---------------------------------------------------

using ScalarLoss = std::function<double(const Eigen::VectorXd&)>;

/// [f(theta + pi/2 e_i) - f(theta - pi/2 e_i)] / 2; exact when f is a
/// first-degree trigonometric polynomial in theta_i.
double parameter_shift_grad(const ScalarLoss& loss, const Eigen::VectorXd& theta, int index);
Eigen::VectorXd parameter_shift_gradient(const ScalarLoss& loss, const Eigen::VectorXd& theta);

/// Central differences [L(theta + eps e_i) - L(theta - eps e_i)] / (2 eps).
Eigen::VectorXd finite_difference_grad(const ScalarLoss& loss, const Eigen::VectorXd& theta,
                                       double epsilon = 0.02);

/// KL(p || q) = sum p_i ln(p_i / q_i), with 0 ln 0 = 0 and q clamped to
/// >= 1e-9 then renormalized.
double kld(const ProbVector& p, const ProbVector& q);

// ---- Fully quantum GAN: single-qubit state learning -------------------------

struct PqGanConfig {
  double lr_g = 0.02;
  double lr_d = 0.1;
  int epochs = 200;
  int d_steps_per_g_step = 3;
  int rounds = 5;
  double init_std = 0.2;
  /// Seed for the initial parameters when every round must start from the
  /// same point; otherwise the run seed is used.
  std::optional<std::uint64_t> init_seed;
  tomo::Shots shots = tomo::kExact;
  bool train_generator = true;
};

/// Generator parameters: [source angle phi, V (z1, y, z2), U (z1, y, z2),
/// target Rz (shifter 7), target Ry (shifter 12)]. The remaining target gates
/// form the discriminator's measurement layer. The source angle enters as
/// cos(phi)|00> + sin(phi)|11>, i.e. a circuit rotation of 2 phi.
inline constexpr int kPqGeneratorParams = 9;
/// Discriminator parameters: the su2 angles (z1, y, z2) on the target qubit.
inline constexpr int kPqDiscriminatorParams = 3;

chip::EquivalentCircuit pqgan_circuit(const Eigen::VectorXd& theta_g);

/// Target-qubit state left after tracing out the signal qubit.
DensityMatrix pqgan_generator(const Eigen::VectorXd& theta_g);

/// M(theta_d) = U_D^dagger |0><0| U_D with U_D = su2(theta_d).
Eigen::Matrix2cd pqgan_measurement(const Eigen::VectorXd& theta_d);

/// tr[M(theta_d) rho(theta_g)] - tr[M(theta_d) sigma].
double pqgan_loss(const Eigen::VectorXd& theta_g, const Eigen::VectorXd& theta_d, const DensityMatrix& sigma);

/// Exact generator gradient of `loss`: parameter shift on every gate angle,
/// with the chain-rule factor 2 for the source angle.
Eigen::VectorXd pqgan_generator_gradient(const ScalarLoss& loss, const Eigen::VectorXd& theta_g);

struct PqGanResult {
  TrainingHistory history;
  Eigen::VectorXd theta_g;
  Eigen::VectorXd theta_d;
  double best_fidelity = 0.0;
  int best_epoch = 0;
};

/// Initial parameters drawn from N(0, init_std).
struct PqGanStart {
  Eigen::VectorXd theta_g;
  Eigen::VectorXd theta_d;
};
PqGanStart pqgan_initial_parameters(const PqGanConfig& config, std::uint64_t seed);

PqGanResult train_pqgan(const PqGanConfig& config, const DensityMatrix& sigma, std::uint64_t seed);
PqGanResult train_pqgan(const PqGanConfig& config, const DensityMatrix& sigma, std::uint64_t seed,
                        PqGanStart start);

// ---- Hybrid GAN: 4-point distribution loading ------------------------------

struct HqcGanConfig {
  double lr_g = 0.08;
  double lr_c = 0.1;
  double lambda = 0.5;
  int epochs = 500;
  int c_steps = 3;
  int rounds = 5;
  double rmsprop_beta = 0.9;
  double init_std = 0.2;
  double leaky_slope = nn::kDefaultSlope;
  std::vector<int> critic_layers{4, 5, 3, 1};
};

/// Ry(t1) on the control, then Ry(t2) on the target if the control is |0>
/// and Ry(t3) if it is |1>, starting from |00>.
ProbVector distribution_generator(const Eigen::Vector3d& theta);

/// Angles reproducing `p` through distribution_generator.
Eigen::Vector3d invert_distribution_generator(const ProbVector& p);

/// d p / d theta_k for every k (columns), by the parameter-shift rule.
Eigen::Matrix<double, 4, 3> distribution_jacobian(const Eigen::Vector3d& theta);

struct DistributionResult {
  TrainingHistory history;
  Eigen::Vector3d theta;
  ProbVector generated{1.0, 0.0, 0.0, 0.0};
  nn::DenseNetwork critic{std::vector<int>{4, 1}};
};

DistributionResult train_distribution(const HqcGanConfig& config, const ProbVector& target, std::uint64_t seed);
DistributionResult train_distribution(const HqcGanConfig& config, const ProbVector& target, std::uint64_t seed,
                                      const Eigen::Vector3d& initial_theta);

// ---- Hybrid generator: compressed images -----------------------------------

struct ImageGanConfig {
  double lr_nn = 0.02;
  double lr_q = 0.08;
  double lr_c = 0.02;
  int batch_size = 5;
  int epochs = 200;
  int rounds = 5;
  double fd_epsilon = 0.02;
  double lambda = 0.5;
  int c_steps = 3;
  double rmsprop_beta = 0.9;
  double init_std = 0.2;
  double leaky_slope = nn::kDefaultSlope;
  std::vector<int> critic_layers{4, 5, 3, 1};
  std::vector<int> head_layers{2, 2, 2};
  int eval_noise_count = 200;  ///< fixed noise bank for the KLD metric
  int sample_count = 100;      ///< generated samples kept after training
};

struct HybridGenerator {
  nn::DenseNetwork head{std::vector<int>{2, 2, 2}};
  Eigen::Vector3d theta_q = Eigen::Vector3d::Zero();
};

/// Encoding layer Ry(g0) (x) Ry(g1) with g = head(z), followed by the
/// distribution_generator circuit with angles theta_q. The control rotation
/// of the training layer composes additively with g0.
ProbVector hybrid_generator(const nn::DenseNetwork& head, const Eigen::Vector3d& theta_q,
                            const Eigen::Vector2d& z);

/// Born probabilities for encoding angles g and training angles theta_q.
ProbVector encoded_distribution(const Eigen::Vector2d& g, const Eigen::Vector3d& theta_q);

struct ImageResult {
  TrainingHistory history;
  HybridGenerator generator;
  nn::DenseNetwork critic{std::vector<int>{4, 1}};
  std::vector<ProbVector> samples;
};

/// Elementwise mean of a non-empty set of distributions.
ProbVector mean_distribution(std::span<const ProbVector> set);

ImageResult train_images(const ImageGanConfig& config, std::span<const ProbVector> dataset, std::uint64_t seed);
ImageResult train_images(const ImageGanConfig& config, std::span<const ProbVector> dataset, std::uint64_t seed,
                         HybridGenerator initial);

}  // namespace qgan::gan
