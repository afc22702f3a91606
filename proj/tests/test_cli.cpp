#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qgan_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

CliRun qgan(const std::string& args) {
  const fs::path log = scratch("log.txt");
  const std::string cmd = std::string("\"") + QGAN_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = slurp(log);
  return r;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void expect_manifest_complete(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  EXPECT_EQ(m["status"], "ok");
  EXPECT_TRUE(m.contains("config"));
  EXPECT_TRUE(m.contains("seeds"));
  EXPECT_TRUE(m.contains("version"));
  EXPECT_TRUE(m.contains("wall_clock_seconds"));
  ASSERT_FALSE(m["outputs"].empty());
  for (const auto& f : m["outputs"]) EXPECT_TRUE(fs::exists(dir / f.get<std::string>())) << f;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(Cli, VersionAndHelp) {
  EXPECT_EQ(qgan("--version").code, 0);
  EXPECT_EQ(qgan("--help").code, 0);
  EXPECT_EQ(qgan("no-such-command").code, 2);
}

TEST(Cli, SelftestPasses) {
  const CliRun r = qgan("selftest");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("selftest passed"), std::string::npos);
}

TEST(Cli, LearnStateBadTargetIsUsageError) {
  const CliRun r = qgan("learn-state --target bogus --out " + scratch("bad").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("--target"), std::string::npos);
  EXPECT_EQ(qgan("learn-state --target custom-json --out " + scratch("bad2").string()).code, 2);
  EXPECT_EQ(qgan("learn-state --shots lots --out " + scratch("bad3").string()).code, 2);
}

TEST(Cli, LearnStateZeroEpochs) {
  const fs::path dir = scratch("zero");
  ASSERT_EQ(qgan("learn-state --target pure --rounds 2 --epochs 0 --out " + dir.string()).code, 0);
  const std::string csv = slurp(dir / "history_round0.csv");
  EXPECT_EQ(count_lines(csv), 2);
  EXPECT_EQ(csv.rfind("epoch,loss_g,loss_d,metric\n0,", 0), 0u);
  expect_manifest_complete(dir);
}

TEST(Cli, LearnStatePureSummary) {
  const fs::path dir = scratch("pure");
  ASSERT_EQ(qgan("learn-state --target pure --rounds 5 --epochs 200 --seed 7 --out " + dir.string()).code, 0);
  const json s = read_json(dir / "summary.json");
  EXPECT_GE(s["median_final_fidelity"].get<double>(), 0.99);
  const json tomo = read_json(dir / "tomography_round0.json");
  EXPECT_TRUE(tomo.contains("generated"));
  expect_manifest_complete(dir);
}

TEST(Cli, LearnStateCustomMaximallyMixed) {
  const fs::path dir = scratch("custom");
  const fs::path target = scratch("half.json");
  std::ofstream(target) << R"({"real": [[0.5, 0], [0, 0.5]], "imag": [[0, 0], [0, 0]]})";
  const CliRun r = qgan("learn-state --target custom-json --target-file " + target.string() +
                     " --rounds 1 --epochs 50 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const json s = read_json(dir / "summary.json");
  const double f = s["mean_final_fidelity"].get<double>();
  EXPECT_GT(f, 0.5);
  EXPECT_LE(f, 1.0 + 1e-12);
}

TEST(Cli, ConfigFileAndPrecedence) {
  const fs::path dir = scratch("config_out");
  const fs::path cfg = scratch("config.json");
  std::ofstream(cfg) << R"({"out": ")" << dir.string() << R"(", "learn-state": {"epochs": 3, "rounds": 1}})";
  ASSERT_EQ(qgan("--config " + cfg.string() + " learn-state --epochs 2").code, 0);
  EXPECT_EQ(count_lines(slurp(dir / "history_round0.csv")), 4);
  EXPECT_FALSE(fs::exists(dir / "history_round1.csv"));
  std::ofstream(cfg) << "{not json";
  EXPECT_EQ(qgan("--config " + cfg.string() + " learn-state").code, 2);
}

TEST(Cli, LoadDistributionOneEpochFinite) {
  const fs::path dir = scratch("dist1");
  ASSERT_EQ(qgan("load-distribution --dist normal --epochs 1 --rounds 1 --out " + dir.string()).code, 0);
  const std::string csv = slurp(dir / "history_round0.csv");
  EXPECT_EQ(count_lines(csv), 3);
  EXPECT_EQ(csv.find("nan"), std::string::npos);
  EXPECT_EQ(csv.find("inf"), std::string::npos);
  EXPECT_EQ(slurp(dir / "target.csv").rfind("bin,probability\n", 0), 0u);
  expect_manifest_complete(dir);
  EXPECT_EQ(qgan("load-distribution --dist uniform --out " + scratch("dbad").string()).code, 2);
}

TEST(Cli, LoadDistributionDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(qgan("load-distribution --dist bimodal --epochs 40 --seed 3 --out " + a.string()).code, 0);
  ASSERT_EQ(qgan("load-distribution --dist bimodal --epochs 40 --seed 3 --out " + b.string()).code, 0);
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().filename() == "manifest.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
  }
}

TEST(Cli, LoadDistributionLognormalConverges) {
  const fs::path dir = scratch("logn");
  ASSERT_EQ(qgan("load-distribution --dist lognormal --epochs 500 --out " + dir.string()).code, 0);
  EXPECT_LT(read_json(dir / "summary.json")["median_final_kld"].get<double>(), 0.05);
}

TEST(Cli, GenImagesMissingDatasetNamesPaths) {
  const CliRun r = qgan("gen-images --digit 0 --mnist /nonexistent/img.idx,/nonexistent/lab.idx --out " +
                     scratch("gbad").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("/nonexistent/img.idx"), std::string::npos);
  EXPECT_EQ(qgan("gen-images --digit 12 --fixture --out " + scratch("gbad2").string()).code, 2);
}

TEST(Cli, GenImagesFixtureRun) {
  const fs::path dir = scratch("images");
  ASSERT_EQ(qgan("gen-images --digit 0 --fixture --epochs 200 --out " + dir.string()).code, 0);
  EXPECT_LT(read_json(dir / "summary.json")["median_final_kld"].get<double>(), 0.1);
  int pgm = 0;
  for (const auto& entry : fs::directory_iterator(dir / "images")) {
    std::istringstream in(slurp(entry.path()));
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    in >> magic >> w >> h >> maxv;
    EXPECT_EQ(magic, "P2");
    EXPECT_EQ(w, 28);
    EXPECT_EQ(h, 28);
    EXPECT_EQ(maxv, 1);
    int v = 0, n = 0;
    while (in >> v) {
      EXPECT_TRUE(v == 0 || v == 1);
      ++n;
    }
    EXPECT_EQ(n, 784);
    ++pgm;
  }
  EXPECT_GT(pgm, 0);
  EXPECT_TRUE(fs::exists(dir / "grid.pgm"));
  EXPECT_TRUE(fs::exists(dir / "pca.json"));
  expect_manifest_complete(dir);
}

TEST(Cli, CalibrateBundledFringe) {
  const fs::path dir = scratch("cal");
  ASSERT_EQ(qgan("calibrate --input " + std::string(QGAN_DATA_DIR) + "/calibration/fringe.csv --out " + dir.string())
                .code,
            0);
  const json c = read_json(dir / "calibration.json");
  EXPECT_NEAR(c["a"].get<double>() / 3000.0, 1.0, 1e-6);
  EXPECT_NEAR(c["alpha"].get<double>() / 0.05, 1.0, 1e-6);
  EXPECT_NEAR(c["beta"].get<double>() / 0.3, 1.0, 1e-6);
  EXPECT_NEAR(c["b"].get<double>() / 20.0, 1.0, 1e-6);
  EXPECT_TRUE(fs::exists(dir / "fit.csv"));
  expect_manifest_complete(dir);
}

TEST(Cli, CalibrateConstantCountsFails) {
  const fs::path input = scratch("flat.csv");
  {
    std::ofstream out(input);
    out << "current_mA,counts_per_s\n";
    for (int k = 0; k < 40; ++k) out << 0.25 * k << ",100\n";
  }
  const CliRun r = qgan("calibrate --input " + input.string() + " --out " + scratch("flat").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("fit failure"), std::string::npos);
  EXPECT_EQ(qgan("calibrate --input /nonexistent.csv --out " + scratch("nocal").string()).code, 2);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path root = scratch("envroot");
  const std::string cmd = "QGAN_OUT_DIR=\"" + root.string() + "\" \"" + QGAN_CLI +
                          "\" learn-state --epochs 1 --rounds 1 > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(root / "learn-state" / "manifest.json"));
}
