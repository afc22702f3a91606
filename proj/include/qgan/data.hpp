#pragma once

// Target distributions, MNIST IDX ingestion, PCA compression and the
// feature <-> probability map used by the image generator.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgan/qcore.hpp"

namespace qgan::data {

struct Gaussian {
  double mu = 0.0;
  double sigma = 1.0;
};

enum class DistributionKind { kNormal, kLognormal, kBimodal };

/// Sampled distribution truncated to [lo, hi] and rounded to the nearest of
/// the four integer bins 0..3. A bimodal spec mixes `first` and `second`
/// with equal weight; a lognormal spec draws exp(N(mu, sigma)).
struct DistributionSpec {
  DistributionKind kind = DistributionKind::kNormal;
  Gaussian first;
  Gaussian second;
  double lo = 0.0;
  double hi = 3.0;
  int sample_count = 10000;

  static DistributionSpec normal(double mu, double sigma);
  static DistributionSpec lognormal(double mu, double sigma);
  static DistributionSpec bimodal(Gaussian a, Gaussian b);
  /// The three standard targets: "normal", "lognormal", "bimodal".
  static DistributionSpec named(const std::string& name);
};

/// Throws InvalidArgument for a bad spec or when every sample is rejected.
ProbVector build_target(const DistributionSpec& spec, std::uint64_t seed);

struct LabeledImage {
  std::vector<double> pixels;  ///< row-major, scaled to [0, 1]
  int label = 0;
};

struct IdxDataset {
  int rows = 0;
  int cols = 0;
  std::vector<LabeledImage> images;
};

/// Parses an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Throws ParseError with the offending byte offset.
IdxDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);
IdxDataset parse_mnist_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);

/// Encodes a dataset in IDX form (pixels rounded to bytes).
std::vector<std::uint8_t> encode_idx_images(const IdxDataset& data);
std::vector<std::uint8_t> encode_idx_labels(const IdxDataset& data);

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  ///< one orthonormal component per column
  Eigen::VectorXd feature_min;
  Eigen::VectorXd feature_max;

  int k() const { return static_cast<int>(components.cols()); }
  int dimension() const { return static_cast<int>(mean.size()); }
};

/// Top-k principal directions via SVD of the centered data. Each component is
/// signed so that its largest-magnitude entry is positive. Throws
/// InvalidArgument with fewer than k + 1 images and FitFailure when fewer than
/// k directions carry variance.
PcaModel pca_fit(std::span<const std::vector<double>> images, int k = 3);
Eigen::VectorXd pca_transform(const PcaModel& model, std::span<const double> image);
std::vector<double> pca_inverse(const PcaModel& model, const Eigen::VectorXd& features);

/// Min-max normalize with the model's ranges, append 0.5, and divide by the
/// sum. Normalized values are not clipped.
ProbVector feature_to_prob(const PcaModel& model, const Eigen::VectorXd& features);
/// Inverse of feature_to_prob. Throws InversionFailure when p3 = 0.
Eigen::VectorXd prob_to_feature(const PcaModel& model, const ProbVector& p);

/// The map on already-normalized features.
ProbVector normalized_to_prob(const Eigen::Vector3d& x_norm);
Eigen::Vector3d prob_to_normalized(const ProbVector& p);

inline constexpr double kDefaultBinarizeThreshold = 0.35;

/// 1 where pixel >= threshold, else 0. threshold must lie in (0, 1).
std::vector<std::uint8_t> binarize(std::span<const double> image, double threshold = kDefaultBinarizeThreshold);

}  // namespace qgan::data
