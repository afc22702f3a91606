#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qgan/chip.hpp"
#include "qgan/error.hpp"

namespace qgan::chip {

namespace {

constexpr double kPi = std::numbers::pi;

struct Params {
  double a, alpha, beta, b;
};

double sse(std::span<const CalibrationSample> s, const Params& p) {
  double total = 0.0;
  for (const auto& x : s) {
    const double sn = std::sin(p.alpha * x.current_ma * x.current_ma + p.beta);
    const double r = p.a * sn * sn * sn * sn + p.b - x.counts_per_s;
    total += r * r;
  }
  return total;
}

// Linear least squares for (a, b) with the fringe shape fixed.
bool solve_linear(std::span<const CalibrationSample> s, double alpha, double beta, Params& out,
                  double& err) {
  double s1 = 0, s2 = 0, sy = 0, sxy = 0;
  const double n = static_cast<double>(s.size());
  for (const auto& x : s) {
    const double sn = std::sin(alpha * x.current_ma * x.current_ma + beta);
    const double f = sn * sn * sn * sn;
    s1 += f;
    s2 += f * f;
    sy += x.counts_per_s;
    sxy += f * x.counts_per_s;
  }
  const double det = n * s2 - s1 * s1;
  if (std::abs(det) < 1e-12 * n * n) return false;
  out.alpha = alpha;
  out.beta = beta;
  out.a = (n * sxy - s1 * sy) / det;
  out.b = (sy - out.a * s1) / n;
  if (!(out.a > 0.0)) return false;
  err = sse(s, out);
  return true;
}

Params levenberg_marquardt(std::span<const CalibrationSample> s, Params p) {
  double lambda = 1e-3;
  double current = sse(s, p);
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (const auto& x : s) {
      const double q = x.current_ma * x.current_ma;
      const double arg = p.alpha * q + p.beta;
      const double sn = std::sin(arg), cs = std::cos(arg);
      const double f = sn * sn * sn * sn;
      const double df = 4.0 * sn * sn * sn * cs;
      const double r = p.a * f + p.b - x.counts_per_s;
      Eigen::Vector4d j(f, p.a * df * q, p.a * df, 1.0);
      jtj += j * j.transpose();
      jtr += j * r;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector4d step = damped.ldlt().solve(-jtr);
      const Params trial{p.a + step(0), p.alpha + step(1), p.beta + step(2), p.b + step(3)};
      const double trial_err = sse(s, trial);
      if (std::isfinite(trial_err) && trial_err <= current) {
        const double rel = (current - trial_err) / std::max(current, 1e-300);
        p = trial;
        current = trial_err;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (rel < 1e-16 || step.norm() < 1e-15) return p;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return p;
}

}  // namespace

HeaterCalibration fit_calibration(std::span<const CalibrationSample> samples) {
  if (samples.size() < 8) throw InvalidArgument("fit_calibration: at least 8 samples are required");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, q_max = 0.0;
  for (const auto& x : samples) {
    if (!std::isfinite(x.current_ma) || !std::isfinite(x.counts_per_s)) {
      throw InvalidArgument("fit_calibration: non-finite sample");
    }
    lo = std::min(lo, x.counts_per_s);
    hi = std::max(hi, x.counts_per_s);
    q_max = std::max(q_max, x.current_ma * x.current_ma);
  }
  if (hi - lo <= 1e-9 * std::max(1.0, std::abs(hi))) {
    throw FitFailure("fit_calibration: counts are constant; no fringe to fit");
  }
  if (q_max <= 0.0) throw FitFailure("fit_calibration: all currents are zero");

  // The fringe sin^4(alpha I^2 + beta) has period pi in its argument. Search
  // alpha over fringe counts from 1/8 to 64 across the sweep.
  constexpr int kAlphaSteps = 1500;
  constexpr int kBetaSteps = 64;
  const double alpha_lo = 0.125 * kPi / q_max, alpha_hi = 64.0 * kPi / q_max;
  struct Candidate {
    double err;
    Params p;
  };
  std::vector<Candidate> best;
  for (int i = 0; i < kAlphaSteps; ++i) {
    const double alpha = alpha_lo * std::pow(alpha_hi / alpha_lo, static_cast<double>(i) / (kAlphaSteps - 1));
    for (int j = 0; j < kBetaSteps; ++j) {
      const double beta = kPi * j / kBetaSteps;
      Params p{};
      double err = 0.0;
      if (!solve_linear(samples, alpha, beta, p, err)) continue;
      best.push_back({err, p});
    }
  }
  if (best.empty()) throw FitFailure("fit_calibration: no fringe shape explains the data");
  constexpr std::size_t kSeeds = 8;
  std::partial_sort(best.begin(), best.begin() + std::min(kSeeds, best.size()), best.end(),
                    [](const Candidate& x, const Candidate& y) { return x.err < y.err; });
  best.resize(std::min(kSeeds, best.size()));

  Params fitted{};
  double fitted_err = std::numeric_limits<double>::infinity();
  for (const auto& c : best) {
    const Params p = levenberg_marquardt(samples, c.p);
    const double e = sse(samples, p);
    if (e < fitted_err && p.a > 0.0) {
      fitted = p;
      fitted_err = e;
    }
  }
  if (!std::isfinite(fitted_err)) throw FitFailure("fit_calibration: refinement diverged");

  if (fitted.alpha < 0.0) {
    fitted.alpha = -fitted.alpha;
    fitted.beta = -fitted.beta;
  }
  fitted.beta = std::fmod(fitted.beta, kPi);
  if (fitted.beta < 0.0) fitted.beta += kPi;
  if (fitted.beta >= kPi) fitted.beta -= kPi;

  HeaterCalibration cal{fitted.a, fitted.alpha, fitted.beta, fitted.b, 0.0};
  cal.rms = std::sqrt(fitted_err / static_cast<double>(samples.size()));
  return cal;
}

}  // namespace qgan::chip
