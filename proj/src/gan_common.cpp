#include <algorithm>
#include <cmath>
#include <numbers>

#include "qgan/error.hpp"
#include "qgan/gan.hpp"

namespace qgan::gan {

double parameter_shift_grad(const ScalarLoss& loss, const Eigen::VectorXd& theta, int index) {
  if (index < 0 || index >= theta.size()) throw InvalidArgument("parameter_shift_grad: index out of range");
  Eigen::VectorXd shifted = theta;
  shifted(index) = theta(index) + std::numbers::pi / 2;
  const double up = loss(shifted);
  shifted(index) = theta(index) - std::numbers::pi / 2;
  const double down = loss(shifted);
  return (up - down) / 2.0;
}

Eigen::VectorXd parameter_shift_gradient(const ScalarLoss& loss, const Eigen::VectorXd& theta) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) g(i) = parameter_shift_grad(loss, theta, static_cast<int>(i));
  return g;
}

Eigen::VectorXd finite_difference_grad(const ScalarLoss& loss, const Eigen::VectorXd& theta, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("finite_difference_grad: epsilon must be positive");
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd shifted = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    shifted(i) = theta(i) + epsilon;
    const double up = loss(shifted);
    shifted(i) = theta(i) - epsilon;
    const double down = loss(shifted);
    shifted(i) = theta(i);
    g(i) = (up - down) / (2.0 * epsilon);
  }
  return g;
}

double kld(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw InvalidArgument("kld: size mismatch");
  Eigen::VectorXd qs = q.values().cwiseMax(1e-9);
  qs /= qs.sum();
  double total = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] * std::log(p[i] / qs(i));
  }
  return std::max(total, 0.0);
}

ProbVector mean_distribution(std::span<const ProbVector> set) {
  if (set.empty()) throw InvalidArgument("mean_distribution: empty set");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(set.front().size());
  for (const auto& p : set) {
    if (p.size() != acc.size()) throw InvalidArgument("mean_distribution: size mismatch");
    acc += p.values();
  }
  acc /= acc.sum();
  return ProbVector(acc);
}

}  // namespace qgan::gan
