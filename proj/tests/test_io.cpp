#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "qgan/error.hpp"
#include "qgan/io.hpp"
#include "test_util.hpp"

using namespace qgan;

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9, 0.0}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(HistoryCsv, RoundTrip) {
  gan::TrainingHistory h;
  for (int e = 0; e < 4; ++e) h.records.push_back({e, 0.1 * e, -0.3 / (e + 1), 1.0 / 7.0 * e, {}});
  const std::string text = io::history_csv(h);
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,loss_g,loss_d,metric");
  const gan::TrainingHistory back = io::parse_history_csv(text);
  ASSERT_EQ(back.records.size(), 4u);
  for (int e = 0; e < 4; ++e) {
    EXPECT_EQ(back.records[e].epoch, e);
    EXPECT_EQ(back.records[e].loss_d, h.records[e].loss_d);
    EXPECT_EQ(back.records[e].metric, h.records[e].metric);
  }
}

TEST(TargetCsv, Layout) {
  EXPECT_EQ(io::target_csv(ProbVector{0.25, 0.25, 0.5, 0.0}), "bin,probability\n0,0.25\n1,0.25\n2,0.5\n3,0\n");
}

TEST(CalibrationCsv, RoundTripAndHeader) {
  const std::vector<chip::CalibrationSample> s{{0.0, 20.0}, {0.25, 21.5}};
  const auto back = io::parse_calibration_csv(io::calibration_csv(s));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].counts_per_s, 21.5);
  EXPECT_ANY_THROW(io::parse_calibration_csv("1,2\n3,4\n"));
}

TEST(Json, CalibrationDensityNetworkPca) {
  chip::HeaterCalibration cal{3000, 0.05, 0.3, 20, 0.1};
  const auto c = io::calibration_from_json(io::to_json(cal));
  EXPECT_EQ(c.alpha, 0.05);
  EXPECT_EQ(c.rms, 0.1);
  EXPECT_TRUE(io::to_json(cal).contains("beta"));

  Rng rng(1);
  const DensityMatrix rho = test::random_density(rng, 1);
  EXPECT_LT((io::density_from_json(io::to_json(rho)).entries() - rho.entries()).norm(), 1e-15);

  const nn::DenseNetwork net = nn::DenseNetwork::random({4, 5, 3, 1}, 17);
  const nn::DenseNetwork back = io::network_from_json(io::to_json(net));
  EXPECT_EQ(back.parameters(), net.parameters());
  EXPECT_EQ(back.layer_sizes(), net.layer_sizes());
  EXPECT_EQ(back.init_seed(), 17u);

  data::PcaModel m;
  m.mean = Eigen::Vector4d(1, 2, 3, 4);
  m.components = Eigen::MatrixXd::Identity(4, 2);
  m.feature_min = Eigen::Vector2d(-1, -2);
  m.feature_max = Eigen::Vector2d(1, 2);
  const data::PcaModel pm = io::pca_from_json(io::to_json(m));
  EXPECT_EQ(pm.components, m.components);
  EXPECT_EQ(pm.feature_max, m.feature_max);
}

TEST(Pgm, PlainAndRawRoundTrip) {
  io::GrayImage im{3, 2, 1, {0, 1, 1, 0, 0, 1}};
  for (bool plain : {true, false}) {
    const io::GrayImage back = io::parse_pgm(io::encode_pgm(im, plain));
    EXPECT_EQ(back.width, 3);
    EXPECT_EQ(back.height, 2);
    EXPECT_EQ(back.max_value, 1);
    EXPECT_EQ(back.pixels, im.pixels);
  }
  EXPECT_EQ(io::encode_pgm(im).substr(0, 2), "P2");
  EXPECT_ANY_THROW(io::parse_pgm("P2\n3 2\n1\n0 1\n"));
}

TEST(Svg, ContainsSeries) {
  const std::vector<io::Series> s{{"round 0", {0, 1, 2}, {1, 0.5, 0.25}}};
  const std::string svg = io::svg_line_chart("KLD", "epoch", "value", s);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
  EXPECT_NE(svg.find("round 0"), std::string::npos);
}
