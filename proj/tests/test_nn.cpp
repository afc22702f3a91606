#include <cmath>

#include <gtest/gtest.h>

#include "qgan/gan.hpp"
#include "qgan/nn.hpp"
#include "qgan/rng.hpp"

using namespace qgan;
using nn::DenseNetwork;

namespace {

Eigen::VectorXd fd_parameters(const DenseNetwork& net, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd theta = net.parameters();
  Eigen::VectorXd g(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    DenseNetwork p = net, m = net;
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    p.set_parameters(tp);
    m.set_parameters(tm);
    g(i) = (p.forward(x)(0) - m.forward(x)(0)) / (2 * h);
  }
  return g;
}

Eigen::VectorXd fd_input(const DenseNetwork& net, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (net.forward(xp)(0) - net.forward(xm)(0)) / (2 * h);
  }
  return g;
}

/// Smallest |pre-activation| over hidden layers, to stay clear of kinks.
double kink_margin(const DenseNetwork& net, const Eigen::VectorXd& x) {
  Eigen::VectorXd a = x;
  double margin = 1e9;
  for (int l = 0; l + 1 < net.depth(); ++l) {
    const Eigen::VectorXd z = net.weights(l) * a + net.biases(l);
    margin = std::min(margin, z.cwiseAbs().minCoeff());
    a = z.unaryExpr([&](double v) { return v > 0 ? v : net.slope() * v; });
  }
  return margin;
}

double penalty_oracle(const DenseNetwork& net, const Eigen::VectorXd& xr, const Eigen::VectorXd& xf, double zeta) {
  const Eigen::VectorXd xh = xr + zeta * (xf - xr);
  const double n = nn::backward(net, xh).input.norm();
  return (n - 1) * (n - 1);
}

}  // namespace

TEST(Forward, ZeroNetworkOutputsZero) {
  const DenseNetwork net({4, 5, 3, 1});
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(net.forward(Eigen::Vector4d(rng.normal(), rng.normal(), rng.normal(), rng.normal()))(0), 0.0);
  }
}

TEST(Forward, SingleAffineLayer) {
  DenseNetwork net({1, 1});
  net.set_layer(0, Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, 1.0));
  EXPECT_EQ(net.forward(Eigen::VectorXd::Constant(1, 3.0))(0), 7.0);
}

TEST(Forward, IdentityNetworkLeakyHidden) {
  DenseNetwork net({2, 2, 2}, 0.01);
  net.set_layer(0, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero());
  net.set_layer(1, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero());
  const Eigen::VectorXd y = net.forward(Eigen::Vector2d(-1, 2));
  EXPECT_DOUBLE_EQ(y(0), -0.01);
  EXPECT_DOUBLE_EQ(y(1), 2.0);
}

TEST(Forward, HomogeneousOnNegativeBranch) {
  DenseNetwork net({2, 3, 1}, 0.2);
  Eigen::MatrixXd w(3, 2);
  w << 1, 0.5, 0.3, 2, 1, 1;
  net.set_layer(0, w, Eigen::Vector3d::Zero());
  net.set_layer(1, Eigen::RowVector3d(1, -2, 0.5), Eigen::VectorXd::Zero(1));
  const Eigen::Vector2d x(-1, -0.5);
  for (double s : {0.5, 2.0, 7.0}) EXPECT_NEAR(net.forward(s * x)(0), s * net.forward(x)(0), 1e-14);
  EXPECT_NEAR(net.forward(x)(0), 0.2 * (w * x).dot(Eigen::Vector3d(1, -2, 0.5)), 1e-14);
}

TEST(Forward, ShapeMismatchRejected) {
  const DenseNetwork net({4, 1});
  EXPECT_ANY_THROW(net.forward(Eigen::Vector2d(1, 2)));
  EXPECT_ANY_THROW(DenseNetwork({4}));
  EXPECT_ANY_THROW(DenseNetwork({4, 0, 1}));
}

TEST(Backward, MatchesFiniteDifferences) {
  Rng rng(2);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 100; ++seed) {
    const DenseNetwork net = DenseNetwork::random({4, 5, 3, 1}, seed);
    const Eigen::Vector4d x(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    if (kink_margin(net, x) < 1e-3) continue;
    ++checked;
    const nn::Gradients g = nn::backward(net, x);
    const Eigen::VectorXd fp = fd_parameters(net, x, 1e-5);
    const Eigen::VectorXd fx = fd_input(net, x, 1e-5);
    const double sp = std::max(1.0, g.parameters.cwiseAbs().maxCoeff());
    const double sx = std::max(1.0, g.input.cwiseAbs().maxCoeff());
    EXPECT_LT((g.parameters - fp).cwiseAbs().maxCoeff() / sp, 1e-6);
    EXPECT_LT((g.input - fx).cwiseAbs().maxCoeff() / sx, 1e-6);
  }
}

TEST(Backward, LinearInputGradientIsWeights) {
  DenseNetwork net({4, 1});
  const Eigen::RowVector4d w(0.3, -1.2, 2.0, 0.7);
  net.set_layer(0, w, Eigen::VectorXd::Constant(1, 0.4));
  const nn::Gradients g = nn::backward(net, Eigen::Vector4d(1, 2, 3, 4));
  EXPECT_LT((g.input - w.transpose()).norm(), 1e-15);
}

TEST(Backward, KinkUsesNegativeSlope) {
  DenseNetwork net({1, 1, 1}, 0.01);
  net.set_layer(0, Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Zero(1));
  net.set_layer(1, Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Zero(1));
  EXPECT_DOUBLE_EQ(nn::backward(net, Eigen::VectorXd::Zero(1)).input(0), 0.01);
  EXPECT_EQ(nn::leaky_relu_derivative(0.0, 0.01), 0.01);
}

TEST(Parameters, FlattenRoundTrip) {
  DenseNetwork net = DenseNetwork::random({4, 5, 3, 1}, 3);
  EXPECT_EQ(net.parameter_count(), 4 * 5 + 5 + 5 * 3 + 3 + 3 + 1);
  const Eigen::VectorXd p = net.parameters();
  EXPECT_EQ(p(1), net.weights(0)(0, 1));
  EXPECT_EQ(p(20), net.biases(0)(0));
  DenseNetwork other({4, 5, 3, 1});
  other.set_parameters(p);
  EXPECT_EQ(other.parameters(), p);
  const double bound = 1 / std::sqrt(4.0);
  EXPECT_LE(net.weights(0).cwiseAbs().maxCoeff(), bound);
}

TEST(RmsProp, ZeroGradientNoMove) {
  Eigen::VectorXd p = Eigen::Vector3d(1, 2, 3);
  nn::OptimizerState s(3);
  nn::rmsprop_step(p, Eigen::Vector3d::Zero(), s, 0.1);
  EXPECT_EQ(p, Eigen::VectorXd(Eigen::Vector3d(1, 2, 3)));
}

TEST(RmsProp, FirstStepByHand) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  nn::OptimizerState s(1, 0.9, 1e-8);
  nn::rmsprop_step(p, Eigen::VectorXd::Constant(1, 1.0), s, 0.1);
  EXPECT_NEAR(p(0), -0.1 / (std::sqrt(0.1) + 1e-8), 1e-15);
  EXPECT_NEAR(s.mean_square(0), 0.1, 1e-15);
}

TEST(RmsProp, ConstantGradientStepTendsToLr) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  nn::OptimizerState s(1);
  double step = 0;
  for (int k = 0; k < 300; ++k) {
    const double before = p(0);
    nn::rmsprop_step(p, Eigen::VectorXd::Constant(1, -3.0), s, 0.05);
    step = p(0) - before;
  }
  EXPECT_NEAR(step, 0.05, 1e-8);
}

TEST(RmsProp, StaysFinite) {
  Rng rng(4);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(5);
  nn::OptimizerState s(5);
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd g(5);
    for (int i = 0; i < 5; ++i) g(i) = rng.normal(0, k % 7 == 0 ? 1e6 : 1e-6);
    nn::rmsprop_step(p, g, s, 0.1);
    ASSERT_TRUE(p.allFinite());
    ASSERT_GE(s.mean_square.minCoeff(), 0.0);
  }
}

TEST(Penalty, LinearCritics) {
  DenseNetwork net({4, 1});
  net.set_layer(0, Eigen::RowVector4d(0.6, 0.8, 0, 0), Eigen::VectorXd::Zero(1));
  const Eigen::Vector4d a(0.1, 0.2, 0.3, 0.4), b(0.4, 0.3, 0.2, 0.1);
  EXPECT_NEAR(nn::gradient_penalty(net, a, b, 0.3).penalty, 0.0, 1e-15);
  net.set_layer(0, Eigen::RowVector4d(3, 0, 0, 0), Eigen::VectorXd::Zero(1));
  for (double z : {0.0, 0.5, 1.0}) EXPECT_NEAR(nn::gradient_penalty(net, a, b, z).penalty, 4.0, 1e-12);
}

TEST(Penalty, InterpolateAndParameterGradients) {
  Rng rng(5);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 20; ++seed) {
    const DenseNetwork net = DenseNetwork::random({4, 5, 3, 1}, seed);
    const Eigen::Vector4d xr(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
    const Eigen::Vector4d xf(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
    const double zeta = rng.uniform();
    const Eigen::VectorXd xh = xr + zeta * (xf - xr);
    if (kink_margin(net, xh) < 1e-2) continue;
    ++checked;
    const nn::PenaltyResult r = nn::gradient_penalty(net, xr, xf, zeta);
    EXPECT_LT((r.interpolate - xh).norm(), 1e-15);
    EXPECT_NEAR(r.penalty, penalty_oracle(net, xr, xf, zeta), 1e-14);
    EXPECT_GE(r.penalty, 0.0);
    const Eigen::VectorXd fd = gan::finite_difference_grad(
        [&](const Eigen::VectorXd& t) {
          DenseNetwork probe = net;
          probe.set_parameters(t);
          return penalty_oracle(probe, xr, xf, zeta);
        },
        net.parameters(), 1e-4);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    EXPECT_LT((r.parameter_gradients - fd).cwiseAbs().maxCoeff() / scale, 1e-4);
  }
}

TEST(Penalty, NeverNegative) {
  Rng rng(6);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const DenseNetwork net = DenseNetwork::random({4, 5, 3, 1}, seed);
    const Eigen::Vector4d xr(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector4d xf(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    EXPECT_GE(nn::gradient_penalty(net, xr, xf, rng.uniform()).penalty, 0.0);
  }
}
