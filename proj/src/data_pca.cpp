#include <cmath>
#include <limits>

#include "qgan/data.hpp"
#include "qgan/error.hpp"

namespace qgan::data {

PcaModel pca_fit(std::span<const std::vector<double>> images, int k) {
  if (k < 1) throw InvalidArgument("pca_fit: k must be positive");
  if (images.size() < static_cast<std::size_t>(k) + 1) {
    throw InvalidArgument("pca_fit: need at least k + 1 images");
  }
  const std::size_t dim = images.front().size();
  if (dim < static_cast<std::size_t>(k)) throw InvalidArgument("pca_fit: image dimension below k");
  const auto n = static_cast<Eigen::Index>(images.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& img = images[static_cast<std::size_t>(i)];
    if (img.size() != dim) throw InvalidArgument("pca_fit: images differ in size");
    for (std::size_t j = 0; j < dim; ++j) {
      if (!std::isfinite(img[j])) throw InvalidArgument("pca_fit: non-finite pixel");
      x(i, static_cast<Eigen::Index>(j)) = img[j];
    }
  }

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  x.rowwise() -= model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double scale = std::max(s.size() > 0 ? s(0) : 0.0, 1e-300);
  const double tol = 1e-10 * scale * std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, dim)));
  if (s.size() < k || s(k - 1) <= tol || s(0) == 0.0) {
    throw FitFailure("pca_fit: data has fewer than k directions of nonzero variance");
  }
  model.components = svd.matrixV().leftCols(k);
  for (int c = 0; c < k; ++c) {
    Eigen::Index at = 0;
    model.components.col(c).cwiseAbs().maxCoeff(&at);
    if (model.components(at, c) < 0.0) model.components.col(c) *= -1.0;
  }

  // Ranges come from pca_transform itself so that every training image maps
  // into [0, 1] without roundoff excursions.
  model.feature_min = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  model.feature_max = Eigen::VectorXd::Constant(k, -std::numeric_limits<double>::infinity());
  for (const auto& img : images) {
    const Eigen::VectorXd f = pca_transform(model, img);
    model.feature_min = model.feature_min.cwiseMin(f);
    model.feature_max = model.feature_max.cwiseMax(f);
  }
  return model;
}

Eigen::VectorXd pca_transform(const PcaModel& model, std::span<const double> image) {
  if (static_cast<Eigen::Index>(image.size()) != model.mean.size()) {
    throw InvalidArgument("pca_transform: image size does not match the model");
  }
  const Eigen::Map<const Eigen::VectorXd> v(image.data(), static_cast<Eigen::Index>(image.size()));
  return model.components.transpose() * (v - model.mean);
}

std::vector<double> pca_inverse(const PcaModel& model, const Eigen::VectorXd& features) {
  if (features.size() != model.components.cols()) throw InvalidArgument("pca_inverse: wrong feature count");
  const Eigen::VectorXd img = model.mean + model.components * features;
  return {img.data(), img.data() + img.size()};
}

ProbVector normalized_to_prob(const Eigen::Vector3d& x_norm) {
  if (!x_norm.allFinite() || (x_norm.array() < 0.0).any()) {
    throw InvalidArgument("feature_to_prob: normalized features must be finite and non-negative");
  }
  Eigen::VectorXd x(4);
  x << x_norm, 0.5;
  return ProbVector(Eigen::VectorXd(x / x.sum()));
}

Eigen::Vector3d prob_to_normalized(const ProbVector& p) {
  if (p.size() != 4) throw InvalidArgument("prob_to_feature: four probabilities required");
  if (p[3] == 0.0) throw InversionFailure("prob_to_feature: p3 = 0 has no preimage");
  return Eigen::Vector3d(p[0], p[1], p[2]) * (0.5 / p[3]);
}

ProbVector feature_to_prob(const PcaModel& model, const Eigen::VectorXd& features) {
  if (model.k() != 3 || features.size() != 3) throw InvalidArgument("feature_to_prob: three features required");
  const Eigen::Vector3d range = model.feature_max - model.feature_min;
  if ((range.array() <= 0.0).any()) throw InvalidArgument("feature_to_prob: degenerate feature range");
  const Eigen::Vector3d x = (features - model.feature_min).cwiseQuotient(range);
  return normalized_to_prob(x);
}

Eigen::VectorXd prob_to_feature(const PcaModel& model, const ProbVector& p) {
  if (model.k() != 3) throw InvalidArgument("prob_to_feature: model must have three components");
  const Eigen::Vector3d range = model.feature_max - model.feature_min;
  const Eigen::Vector3d x = prob_to_normalized(p);
  return model.feature_min + x.cwiseProduct(range);
}

std::vector<std::uint8_t> binarize(std::span<const double> image, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("binarize: threshold must lie in (0, 1)");
  std::vector<std::uint8_t> out(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) out[i] = image[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace qgan::data
