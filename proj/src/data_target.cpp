#include <cmath>

#include "qgan/data.hpp"
#include "qgan/error.hpp"
#include "qgan/rng.hpp"

namespace qgan::data {

DistributionSpec DistributionSpec::normal(double mu, double sigma) {
  DistributionSpec s;
  s.kind = DistributionKind::kNormal;
  s.first = {mu, sigma};
  return s;
}

DistributionSpec DistributionSpec::lognormal(double mu, double sigma) {
  DistributionSpec s;
  s.kind = DistributionKind::kLognormal;
  s.first = {mu, sigma};
  return s;
}

DistributionSpec DistributionSpec::bimodal(Gaussian a, Gaussian b) {
  DistributionSpec s;
  s.kind = DistributionKind::kBimodal;
  s.first = a;
  s.second = b;
  return s;
}

DistributionSpec DistributionSpec::named(const std::string& name) {
  if (name == "normal") return normal(1.5, 1.0);
  if (name == "lognormal") return lognormal(0.5, 1.0);
  if (name == "bimodal") return bimodal({0.0, 0.5}, {2.0, 0.3});
  throw InvalidArgument("unknown distribution '" + name + "' (expected normal, lognormal or bimodal)");
}

ProbVector build_target(const DistributionSpec& spec, std::uint64_t seed) {
  auto valid = [](const Gaussian& g) { return std::isfinite(g.mu) && std::isfinite(g.sigma) && g.sigma > 0.0; };
  if (!valid(spec.first) || (spec.kind == DistributionKind::kBimodal && !valid(spec.second))) {
    throw InvalidArgument("build_target: sigma must be positive and parameters finite");
  }
  if (!(spec.lo <= spec.hi) || !std::isfinite(spec.lo) || !std::isfinite(spec.hi)) {
    throw InvalidArgument("build_target: empty truncation interval");
  }
  if (spec.sample_count < 1) throw InvalidArgument("build_target: sample_count must be positive");

  Rng rng(seed);
  Eigen::Vector4d counts = Eigen::Vector4d::Zero();
  for (int i = 0; i < spec.sample_count; ++i) {
    double x = 0.0;
    switch (spec.kind) {
      case DistributionKind::kNormal:
        x = rng.normal(spec.first.mu, spec.first.sigma);
        break;
      case DistributionKind::kLognormal:
        x = std::exp(rng.normal(spec.first.mu, spec.first.sigma));
        break;
      case DistributionKind::kBimodal: {
        const Gaussian& g = rng.uniform() < 0.5 ? spec.first : spec.second;
        x = rng.normal(g.mu, g.sigma);
        break;
      }
    }
    if (x < spec.lo || x > spec.hi) continue;
    const double bin = std::round(x);
    if (bin < 0.0 || bin > 3.0) continue;
    counts(static_cast<int>(bin)) += 1.0;
  }
  const double total = counts.sum();
  if (total == 0.0) throw InvalidArgument("build_target: every sample fell outside the truncation interval");
  return ProbVector(Eigen::VectorXd(counts / total));
}

}  // namespace qgan::data
