// qgan: experiment runner for the photonic-chip GAN simulator.
//
// Exit codes: 0 success, 2 usage error, 3 runtime or training failure.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "output.hpp"
#include "qgan/chip.hpp"
#include "qgan/data.hpp"
#include "qgan/error.hpp"
#include "qgan/gan.hpp"
#include "qgan/io.hpp"
#include "qgan/tomography.hpp"
#include "selftest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using qgan::cli::OutputSet;
using qgan::cli::UsageError;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

#ifndef QGAN_DATA_DIR
#define QGAN_DATA_DIR "data"
#endif

// Flag > config file > built-in default.
template <class T>
void merge(const CLI::Option* flag, const json& section, const char* key, T& value) {
  if (flag != nullptr && flag->count() > 0) return;
  if (!section.contains(key)) return;
  try {
    value = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

json load_config(const std::string& path, const std::string& section) {
  if (path.empty()) return json::object();
  json all;
  try {
    all = json::parse(qgan::io::read_text_file(path));
  } catch (const qgan::InvalidArgument& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!all.is_object()) throw UsageError("config " + path + ": top level must be an object");
  json merged = json::object();
  if (all.contains("out")) merged["out"] = all["out"];
  if (all.contains(section)) {
    if (!all[section].is_object()) throw UsageError("config section '" + section + "' must be an object");
    merged.update(all[section]);
  }
  return merged;
}

fs::path output_dir(const CLI::Option* flag, const std::string& flag_value, const json& section,
                    const std::string& command) {
  if (flag->count() > 0) return flag_value;
  if (section.contains("out")) return section["out"].get<std::string>();
  if (const char* env = std::getenv("QGAN_OUT_DIR"); env != nullptr && *env != '\0') return fs::path(env) / command;
  return fs::path("runs") / command;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string round_name(const char* stem, int round, const char* ext) {
  return std::string(stem) + "_round" + std::to_string(round) + ext;
}

template <class Fn>
auto run_rounds(int rounds, Fn fn) {
  using Result = decltype(fn(0));
  std::vector<std::future<Result>> futures;
  for (int r = 0; r < rounds; ++r) futures.push_back(std::async(std::launch::async, fn, r));
  std::vector<Result> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

std::string metric_chart(const std::string& title, const std::string& y_label,
                         const std::vector<qgan::gan::TrainingHistory>& histories, bool critic_loss) {
  std::vector<qgan::io::Series> series;
  for (std::size_t r = 0; r < histories.size(); ++r) {
    qgan::io::Series s{"round " + std::to_string(r), {}, {}};
    for (const auto& rec : histories[r].records) {
      s.x.push_back(rec.epoch);
      s.y.push_back(critic_loss ? rec.loss_d : rec.metric);
    }
    series.push_back(std::move(s));
  }
  return qgan::io::svg_line_chart(title, "epoch", y_label, series);
}

std::string aborted_diagnostics(const std::vector<qgan::gan::TrainingHistory>& histories) {
  std::string msg;
  for (std::size_t r = 0; r < histories.size(); ++r) {
    if (histories[r].aborted) msg += "round " + std::to_string(r) + ": " + histories[r].diagnostic + "\n";
  }
  return msg;
}

// ---- learn-state -------------------------------------------------------------

struct LearnStateArgs {
  std::string target = "pure";
  std::string target_file;
  int rounds = 5;
  int epochs = 200;
  std::uint64_t seed = 7;
  std::string shots = "exact";
  std::string out;
};

qgan::DensityMatrix learn_state_target(const LearnStateArgs& a) {
  if (a.target == "pure") {
    Eigen::Matrix2cd m;
    m << 0.5, 0.5, 0.5, 0.5;
    return qgan::DensityMatrix(m);
  }
  if (a.target == "mixed") {
    Eigen::Matrix2cd m;
    m << 0.7, 0.0, 0.0, 0.3;
    return qgan::DensityMatrix(m);
  }
  if (a.target == "custom-json") {
    if (a.target_file.empty()) throw UsageError("--target custom-json requires --target-file");
    try {
      const auto rho = qgan::io::density_from_json(json::parse(qgan::io::read_text_file(a.target_file)));
      if (rho.qubit_count() != 1) throw UsageError("--target-file must hold a 2x2 density matrix");
      return rho;
    } catch (const json::exception& e) {
      throw UsageError("--target-file " + a.target_file + ": " + e.what());
    } catch (const qgan::InvalidArgument& e) {
      throw UsageError("--target-file " + a.target_file + ": " + e.what());
    }
  }
  throw UsageError("--target must be pure, mixed or custom-json (got '" + a.target + "')");
}

qgan::tomo::Shots parse_shots(const std::string& s) {
  if (s == "exact") return qgan::tomo::kExact;
  try {
    std::size_t used = 0;
    const long long n = std::stoll(s, &used);
    if (used == s.size() && n > 0) return static_cast<std::uint64_t>(n);
  } catch (const std::exception&) {
  }
  throw UsageError("--shots must be 'exact' or a positive integer (got '" + s + "')");
}

int cmd_learn_state(LearnStateArgs a, const json& cfg, const std::map<std::string, CLI::Option*>& flags) {
  merge(flags.at("target"), cfg, "target", a.target);
  merge(flags.at("target-file"), cfg, "target_file", a.target_file);
  merge(flags.at("rounds"), cfg, "rounds", a.rounds);
  merge(flags.at("epochs"), cfg, "epochs", a.epochs);
  merge(flags.at("seed"), cfg, "seed", a.seed);
  merge(flags.at("shots"), cfg, "shots", a.shots);
  qgan::gan::PqGanConfig config;
  merge(nullptr, cfg, "lr_g", config.lr_g);
  merge(nullptr, cfg, "lr_d", config.lr_d);
  merge(nullptr, cfg, "d_steps", config.d_steps_per_g_step);
  merge(nullptr, cfg, "init_std", config.init_std);
  if (a.rounds < 1) throw UsageError("--rounds must be at least 1");
  if (a.epochs < 0) throw UsageError("--epochs must be non-negative");
  config.epochs = a.epochs;
  config.rounds = a.rounds;
  config.shots = parse_shots(a.shots);
  const qgan::DensityMatrix sigma = learn_state_target(a);
  // Mixed-state rounds share their starting parameters.
  if (a.target == "mixed") config.init_seed = a.seed;

  const fs::path out = output_dir(flags.at("out"), a.out, cfg, "learn-state");
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < a.rounds; ++r) seeds.push_back(qgan::derive_seed(a.seed, static_cast<std::uint64_t>(r)));

  const auto results = run_rounds(a.rounds, [&](int r) { return qgan::gan::train_pqgan(config, sigma, seeds[r]); });

  OutputSet outputs(out, "learn-state");
  std::vector<qgan::gan::TrainingHistory> histories;
  std::vector<double> finals, bests;
  json rounds = json::array();
  for (int r = 0; r < a.rounds; ++r) {
    const auto& res = results[r];
    histories.push_back(res.history);
    outputs.add(round_name("history", r, ".csv"), qgan::io::history_csv(res.history));
    if (res.history.records.empty()) continue;
    qgan::Rng rng(qgan::derive_seed(seeds[r], 7));
    const auto rho = qgan::tomo::reconstruct(
        qgan::tomo::measure_all(qgan::gan::pqgan_generator(res.theta_g), config.shots, rng));
    outputs.add(round_name("tomography", r, ".json"),
                json{{"generated", qgan::io::to_json(rho)}, {"target", qgan::io::to_json(sigma)},
                     {"fidelity", qgan::fidelity(rho, sigma)}}
                        .dump(2) + "\n");
    finals.push_back(res.history.records.back().metric);
    bests.push_back(res.best_fidelity);
    rounds.push_back({{"seed", seeds[r]},
                      {"final_fidelity", res.history.records.back().metric},
                      {"best_fidelity", res.best_fidelity},
                      {"best_epoch", res.best_epoch},
                      {"aborted", res.history.aborted}});
  }
  json summary = {{"target", a.target}, {"rounds", rounds}};
  if (!finals.empty()) {
    summary["mean_final_fidelity"] = mean_of(finals);
    summary["std_final_fidelity"] = std_of(finals);
    summary["median_final_fidelity"] = median_of(finals);
    summary["mean_best_fidelity"] = mean_of(bests);
    summary["std_best_fidelity"] = std_of(bests);
  }
  outputs.add("summary.json", summary.dump(2) + "\n");
  outputs.add("fidelity.svg", metric_chart("State fidelity", "fidelity", histories, false));

  const std::string diag = aborted_diagnostics(histories);
  json config_json = {{"target", a.target},     {"target_file", a.target_file}, {"rounds", a.rounds},
                      {"epochs", a.epochs},     {"seed", a.seed},               {"shots", a.shots},
                      {"lr_g", config.lr_g},    {"lr_d", config.lr_d},          {"d_steps", config.d_steps_per_g_step},
                      {"init_std", config.init_std}};
  outputs.commit(config_json, seeds, diag.empty() ? "ok" : "aborted");
  if (!finals.empty()) {
    std::cout << "final fidelity " << mean_of(finals) << " +/- " << std_of(finals) << " over " << finals.size()
              << " rounds; outputs in " << out.string() << "\n";
  }
  if (!diag.empty()) {
    std::cerr << "training aborted:\n" << diag;
    return kExitRuntime;
  }
  return kExitOk;
}

// ---- load-distribution -----------------------------------------------------

struct DistributionArgs {
  std::string dist = "normal";
  int rounds = 5;
  int epochs = 500;
  std::uint64_t seed = 7;
  double lambda = 0.5;
  std::string out;
};

int cmd_load_distribution(DistributionArgs a, const json& cfg, const std::map<std::string, CLI::Option*>& flags) {
  merge(flags.at("dist"), cfg, "dist", a.dist);
  merge(flags.at("rounds"), cfg, "rounds", a.rounds);
  merge(flags.at("epochs"), cfg, "epochs", a.epochs);
  merge(flags.at("seed"), cfg, "seed", a.seed);
  merge(flags.at("lambda"), cfg, "lambda", a.lambda);
  qgan::gan::HqcGanConfig config;
  merge(nullptr, cfg, "lr_g", config.lr_g);
  merge(nullptr, cfg, "lr_c", config.lr_c);
  merge(nullptr, cfg, "c_steps", config.c_steps);
  merge(nullptr, cfg, "rmsprop_beta", config.rmsprop_beta);
  merge(nullptr, cfg, "init_std", config.init_std);
  merge(nullptr, cfg, "critic_layers", config.critic_layers);
  if (a.rounds < 1) throw UsageError("--rounds must be at least 1");
  if (a.epochs < 0) throw UsageError("--epochs must be non-negative");
  if (!(a.lambda >= 0.0)) throw UsageError("--lambda must be non-negative");
  config.epochs = a.epochs;
  config.rounds = a.rounds;
  config.lambda = a.lambda;

  qgan::data::DistributionSpec spec;
  try {
    spec = qgan::data::DistributionSpec::named(a.dist);
  } catch (const qgan::InvalidArgument& e) {
    throw UsageError(std::string("--dist: ") + e.what());
  }
  const qgan::ProbVector target = qgan::data::build_target(spec, a.seed);
  const fs::path out = output_dir(flags.at("out"), a.out, cfg, "load-distribution");
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < a.rounds; ++r) seeds.push_back(qgan::derive_seed(a.seed, static_cast<std::uint64_t>(r) + 1));

  const auto results =
      run_rounds(a.rounds, [&](int r) { return qgan::gan::train_distribution(config, target, seeds[r]); });

  OutputSet outputs(out, "load-distribution");
  outputs.add("target.csv", qgan::io::target_csv(target));
  std::vector<qgan::gan::TrainingHistory> histories;
  std::vector<double> finals;
  json rounds = json::array();
  for (int r = 0; r < a.rounds; ++r) {
    const auto& res = results[r];
    histories.push_back(res.history);
    outputs.add(round_name("history", r, ".csv"), qgan::io::history_csv(res.history));
    outputs.add(round_name("distribution", r, ".csv"), qgan::io::target_csv(res.generated));
    if (res.history.records.empty()) continue;
    finals.push_back(res.history.records.back().metric);
    rounds.push_back({{"seed", seeds[r]},
                      {"final_kld", res.history.records.back().metric},
                      {"final_critic_loss", res.history.records.back().loss_d},
                      {"theta", {res.theta(0), res.theta(1), res.theta(2)}},
                      {"aborted", res.history.aborted}});
  }
  json summary = {{"dist", a.dist}, {"target", target.to_vector()}, {"rounds", rounds}};
  if (!finals.empty()) {
    summary["median_final_kld"] = median_of(finals);
    summary["mean_final_kld"] = mean_of(finals);
    summary["std_final_kld"] = std_of(finals);
  }
  outputs.add("summary.json", summary.dump(2) + "\n");
  outputs.add("kld.svg", metric_chart("KLD (" + a.dist + ")", "KLD", histories, false));
  outputs.add("critic_loss.svg", metric_chart("Critic loss (" + a.dist + ")", "critic loss", histories, true));

  const std::string diag = aborted_diagnostics(histories);
  json config_json = {{"dist", a.dist},
                      {"rounds", a.rounds},
                      {"epochs", a.epochs},
                      {"seed", a.seed},
                      {"lambda", a.lambda},
                      {"lr_g", config.lr_g},
                      {"lr_c", config.lr_c},
                      {"c_steps", config.c_steps},
                      {"rmsprop_beta", config.rmsprop_beta},
                      {"init_std", config.init_std},
                      {"critic_layers", config.critic_layers}};
  outputs.commit(config_json, seeds, diag.empty() ? "ok" : "aborted");
  if (!finals.empty()) {
    std::cout << "median final KLD " << median_of(finals) << " over " << finals.size() << " rounds; outputs in "
              << out.string() << "\n";
  }
  if (!diag.empty()) {
    std::cerr << "training aborted:\n" << diag;
    return kExitRuntime;
  }
  return kExitOk;
}

// ---- gen-images --------------------------------------------------------------

struct ImageArgs {
  int digit = 0;
  std::vector<std::string> mnist;
  std::string fixture;
  int rounds = 5;
  int epochs = 200;
  int batch = 5;
  std::uint64_t seed = 7;
  double threshold = qgan::data::kDefaultBinarizeThreshold;
  int preview = 8;
  std::string out;
};

qgan::io::GrayImage binary_image(const std::vector<double>& pixels, int rows, int cols, double threshold) {
  const auto bits = qgan::data::binarize(pixels, threshold);
  qgan::io::GrayImage img{cols, rows, 1, std::vector<int>(bits.begin(), bits.end())};
  return img;
}

// Real images on the top row, generated on the bottom, one blank pixel between tiles.
qgan::io::GrayImage side_by_side(const std::vector<qgan::io::GrayImage>& real,
                                 const std::vector<qgan::io::GrayImage>& generated, int rows, int cols) {
  const int n = static_cast<int>(std::max(real.size(), generated.size()));
  qgan::io::GrayImage grid;
  grid.width = std::max(1, n * (cols + 1) - 1);
  grid.height = 2 * rows + 1;
  grid.max_value = 1;
  grid.pixels.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);
  auto blit = [&](const qgan::io::GrayImage& tile, int tile_col, int row0) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        grid.pixels[static_cast<std::size_t>((row0 + r) * grid.width + tile_col * (cols + 1) + c)] =
            tile.pixels[static_cast<std::size_t>(r * cols + c)];
  };
  for (std::size_t i = 0; i < real.size(); ++i) blit(real[i], static_cast<int>(i), 0);
  for (std::size_t i = 0; i < generated.size(); ++i) blit(generated[i], static_cast<int>(i), rows + 1);
  return grid;
}

int cmd_gen_images(ImageArgs a, const json& cfg, const std::map<std::string, CLI::Option*>& flags) {
  merge(flags.at("digit"), cfg, "digit", a.digit);
  merge(flags.at("mnist"), cfg, "mnist", a.mnist);
  merge(flags.at("fixture"), cfg, "fixture", a.fixture);
  merge(flags.at("rounds"), cfg, "rounds", a.rounds);
  merge(flags.at("epochs"), cfg, "epochs", a.epochs);
  merge(flags.at("batch"), cfg, "batch", a.batch);
  merge(flags.at("seed"), cfg, "seed", a.seed);
  merge(flags.at("threshold"), cfg, "threshold", a.threshold);
  qgan::gan::ImageGanConfig config;
  merge(nullptr, cfg, "lr_nn", config.lr_nn);
  merge(nullptr, cfg, "lr_q", config.lr_q);
  merge(nullptr, cfg, "lr_c", config.lr_c);
  merge(nullptr, cfg, "lambda", config.lambda);
  merge(nullptr, cfg, "fd_epsilon", config.fd_epsilon);
  merge(nullptr, cfg, "c_steps", config.c_steps);
  merge(nullptr, cfg, "sample_count", config.sample_count);
  if (a.digit < 0 || a.digit > 9) throw UsageError("--digit must be 0..9");
  if (a.rounds < 1) throw UsageError("--rounds must be at least 1");
  if (a.epochs < 0) throw UsageError("--epochs must be non-negative");
  if (a.batch < 1) throw UsageError("--batch must be at least 1");
  if (!(a.threshold > 0.0 && a.threshold < 1.0)) throw UsageError("--threshold must lie in (0, 1)");
  config.epochs = a.epochs;
  config.rounds = a.rounds;
  config.batch_size = a.batch;

  std::string images_path, labels_path;
  if (!a.mnist.empty()) {
    if (a.mnist.size() != 2) throw UsageError("--mnist takes IMAGES,LABELS");
    images_path = a.mnist[0];
    labels_path = a.mnist[1];
  } else {
    const fs::path dir = a.fixture.empty() ? fs::path(QGAN_DATA_DIR) / "fixture" : fs::path(a.fixture);
    images_path = (dir / "images-idx3-ubyte").string();
    labels_path = (dir / "labels-idx1-ubyte").string();
  }
  std::vector<std::string> missing;
  for (const auto& p : {images_path, labels_path})
    if (!fs::is_regular_file(p)) missing.push_back(p);
  if (!missing.empty()) {
    std::string msg = "dataset files not found:";
    for (const auto& p : missing) msg += " " + p;
    throw UsageError(msg);
  }
  qgan::data::IdxDataset dataset;
  try {
    dataset = qgan::data::load_mnist_idx(images_path, labels_path);
  } catch (const qgan::ParseError& e) {
    throw UsageError(std::string("dataset: ") + e.what());
  }

  std::vector<std::vector<double>> images;
  for (const auto& img : dataset.images)
    if (img.label == a.digit) images.push_back(img.pixels);
  if (images.size() < 4) throw UsageError("dataset holds fewer than 4 images of digit " + std::to_string(a.digit));

  const qgan::data::PcaModel model = qgan::data::pca_fit(images, 3);
  std::vector<qgan::ProbVector> probs;
  for (const auto& img : images) probs.push_back(qgan::data::feature_to_prob(model, qgan::data::pca_transform(model, img)));

  const fs::path out = output_dir(flags.at("out"), a.out, cfg, "gen-images");
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < a.rounds; ++r) seeds.push_back(qgan::derive_seed(a.seed, static_cast<std::uint64_t>(r) + 1));
  const auto results = run_rounds(a.rounds, [&](int r) { return qgan::gan::train_images(config, probs, seeds[r]); });

  OutputSet outputs(out, "gen-images");
  outputs.add("pca.json", qgan::io::to_json(model).dump() + "\n");
  std::vector<qgan::gan::TrainingHistory> histories;
  std::vector<double> finals;
  json rounds = json::array();
  std::vector<std::vector<double>> preview_generated;
  for (int r = 0; r < a.rounds; ++r) {
    const auto& res = results[r];
    histories.push_back(res.history);
    outputs.add(round_name("history", r, ".csv"), qgan::io::history_csv(res.history));
    std::string bank = "p0,p1,p2,p3,f0,f1,f2\n";
    int skipped = 0;
    for (const auto& p : res.samples) {
      Eigen::VectorXd f;
      try {
        f = qgan::data::prob_to_feature(model, p);
      } catch (const qgan::InversionFailure&) {
        ++skipped;
        continue;
      }
      for (int i = 0; i < 4; ++i) bank += qgan::io::format_double(p[i]) + ',';
      bank += qgan::io::format_double(f(0)) + ',' + qgan::io::format_double(f(1)) + ',' +
              qgan::io::format_double(f(2)) + '\n';
      if (r == 0 && static_cast<int>(preview_generated.size()) < a.preview) {
        preview_generated.push_back(qgan::data::pca_inverse(model, f));
      }
    }
    outputs.add(round_name("samples", r, ".csv"), bank);
    if (res.history.records.empty()) continue;
    finals.push_back(res.history.records.back().metric);
    rounds.push_back({{"seed", seeds[r]},
                      {"final_kld", res.history.records.back().metric},
                      {"final_critic_loss", res.history.records.back().loss_d},
                      {"samples_without_preimage", skipped},
                      {"aborted", res.history.aborted}});
  }

  std::vector<qgan::io::GrayImage> real_tiles, gen_tiles;
  for (int i = 0; i < std::min<int>(a.preview, static_cast<int>(images.size())); ++i) {
    const auto recon = qgan::data::pca_inverse(model, qgan::data::pca_transform(model, images[i]));
    real_tiles.push_back(binary_image(recon, dataset.rows, dataset.cols, a.threshold));
    outputs.add("images/real_" + std::to_string(i) + ".pgm", qgan::io::encode_pgm(real_tiles.back()));
  }
  for (std::size_t i = 0; i < preview_generated.size(); ++i) {
    gen_tiles.push_back(binary_image(preview_generated[i], dataset.rows, dataset.cols, a.threshold));
    outputs.add("images/generated_" + std::to_string(i) + ".pgm", qgan::io::encode_pgm(gen_tiles.back()));
  }
  outputs.add("grid.pgm", qgan::io::encode_pgm(side_by_side(real_tiles, gen_tiles, dataset.rows, dataset.cols)));

  json summary = {{"digit", a.digit}, {"images", images.size()}, {"rounds", rounds}};
  if (!finals.empty()) {
    summary["median_final_kld"] = median_of(finals);
    summary["mean_final_kld"] = mean_of(finals);
    summary["std_final_kld"] = std_of(finals);
  }
  outputs.add("summary.json", summary.dump(2) + "\n");
  outputs.add("kld.svg", metric_chart("KLD (digit " + std::to_string(a.digit) + ")", "KLD", histories, false));
  outputs.add("critic_loss.svg",
              metric_chart("Critic loss (digit " + std::to_string(a.digit) + ")", "critic loss", histories, true));

  const std::string diag = aborted_diagnostics(histories);
  json config_json = {{"digit", a.digit},
                      {"images_path", images_path},
                      {"labels_path", labels_path},
                      {"rounds", a.rounds},
                      {"epochs", a.epochs},
                      {"batch", a.batch},
                      {"seed", a.seed},
                      {"threshold", a.threshold},
                      {"lr_nn", config.lr_nn},
                      {"lr_q", config.lr_q},
                      {"lr_c", config.lr_c},
                      {"lambda", config.lambda},
                      {"fd_epsilon", config.fd_epsilon},
                      {"c_steps", config.c_steps},
                      {"sample_count", config.sample_count}};
  outputs.commit(config_json, seeds, diag.empty() ? "ok" : "aborted");
  if (!finals.empty()) {
    std::cout << "median final KLD " << median_of(finals) << " over " << finals.size() << " rounds; outputs in "
              << out.string() << "\n";
  }
  if (!diag.empty()) {
    std::cerr << "training aborted:\n" << diag;
    return kExitRuntime;
  }
  return kExitOk;
}

// ---- calibrate -----------------------------------------------------------------

int cmd_calibrate(std::string input, std::string out_flag, const json& cfg,
                  const std::map<std::string, CLI::Option*>& flags) {
  merge(flags.at("input"), cfg, "input", input);
  if (input.empty()) throw UsageError("--input is required");
  if (!fs::is_regular_file(input)) throw UsageError("calibration input not found: " + input);
  std::vector<qgan::chip::CalibrationSample> samples;
  try {
    samples = qgan::io::parse_calibration_csv(qgan::io::read_text_file(input));
  } catch (const qgan::InvalidArgument& e) {
    throw UsageError(input + ": " + e.what());
  }
  const qgan::chip::HeaterCalibration cal = qgan::chip::fit_calibration(samples);

  const fs::path out = output_dir(flags.at("out"), out_flag, cfg, "calibrate");
  OutputSet outputs(out, "calibrate");
  outputs.add("calibration.json", qgan::io::to_json(cal).dump(2) + "\n");
  std::string fit = "current_mA,counts_per_s,fitted\n";
  qgan::io::Series measured{"measured", {}, {}}, fitted{"fit", {}, {}};
  for (const auto& s : samples) {
    fit += qgan::io::format_double(s.current_ma) + ',' + qgan::io::format_double(s.counts_per_s) + ',' +
           qgan::io::format_double(cal.counts_at(s.current_ma)) + '\n';
    measured.x.push_back(s.current_ma);
    measured.y.push_back(s.counts_per_s);
  }
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : samples) lo = std::min(lo, s.current_ma), hi = std::max(hi, s.current_ma);
  for (int i = 0; i <= 400; ++i) {
    const double c = lo + (hi - lo) * i / 400.0;
    fitted.x.push_back(c);
    fitted.y.push_back(cal.counts_at(c));
  }
  outputs.add("fit.csv", fit);
  const std::vector<qgan::io::Series> series{measured, fitted};
  outputs.add("fit.svg", qgan::io::svg_line_chart("Heater calibration", "current (mA)", "counts/s", series));
  outputs.commit({{"input", input}}, json::array(), "ok");
  std::cout << "a=" << cal.a << " alpha=" << cal.alpha << " beta=" << cal.beta << " b=" << cal.b
            << " rms=" << cal.rms << "; outputs in " << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic-chip quantum GAN simulator"};
  app.set_version_flag("--version", std::string(QGAN_VERSION));
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.require_subcommand(1);

  LearnStateArgs ls;
  auto* learn = app.add_subcommand("learn-state", "Learn a single-qubit state with the fully quantum GAN");
  std::map<std::string, CLI::Option*> ls_flags;
  ls_flags["target"] = learn->add_option("--target", ls.target, "pure | mixed | custom-json");
  ls_flags["target-file"] = learn->add_option("--target-file", ls.target_file, "density matrix JSON for custom-json");
  ls_flags["rounds"] = learn->add_option("--rounds", ls.rounds, "independent training rounds");
  ls_flags["epochs"] = learn->add_option("--epochs", ls.epochs, "epochs per round");
  ls_flags["seed"] = learn->add_option("--seed", ls.seed, "base seed");
  ls_flags["shots"] = learn->add_option("--shots", ls.shots, "exact | N measurement shots");
  ls_flags["out"] = learn->add_option("--out", ls.out, "output directory");

  DistributionArgs da;
  auto* load = app.add_subcommand("load-distribution", "Load a 4-point distribution with the hybrid GAN");
  std::map<std::string, CLI::Option*> da_flags;
  da_flags["dist"] = load->add_option("--dist", da.dist, "normal | lognormal | bimodal");
  da_flags["rounds"] = load->add_option("--rounds", da.rounds, "independent training rounds");
  da_flags["epochs"] = load->add_option("--epochs", da.epochs, "epochs per round");
  da_flags["seed"] = load->add_option("--seed", da.seed, "base seed");
  da_flags["lambda"] = load->add_option("--lambda", da.lambda, "gradient penalty coefficient");
  da_flags["out"] = load->add_option("--out", da.out, "output directory");

  ImageArgs ia;
  auto* gen = app.add_subcommand("gen-images", "Generate PCA-compressed digit images with the hybrid generator");
  std::map<std::string, CLI::Option*> ia_flags;
  ia_flags["digit"] = gen->add_option("--digit", ia.digit, "digit class 0..9");
  ia_flags["mnist"] = gen->add_option("--mnist", ia.mnist, "IMAGES,LABELS idx files")->delimiter(',');
  ia_flags["fixture"] = gen->add_option("--fixture", ia.fixture, "fixture directory (default: bundled)")
                            ->expected(0, 1);
  ia_flags["rounds"] = gen->add_option("--rounds", ia.rounds, "independent training rounds");
  ia_flags["epochs"] = gen->add_option("--epochs", ia.epochs, "epochs per round");
  ia_flags["batch"] = gen->add_option("--batch", ia.batch, "batch size");
  ia_flags["seed"] = gen->add_option("--seed", ia.seed, "base seed");
  ia_flags["threshold"] = gen->add_option("--threshold", ia.threshold, "binarization threshold");
  ia_flags["out"] = gen->add_option("--out", ia.out, "output directory");
  ia_flags["mnist"]->excludes(ia_flags["fixture"]);

  std::string cal_input, cal_out;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a heater calibration to a fringe CSV");
  std::map<std::string, CLI::Option*> cal_flags;
  cal_flags["input"] = calibrate->add_option("--input", cal_input, "CSV with header current_mA,counts_per_s");
  cal_flags["out"] = calibrate->add_option("--out", cal_out, "output directory");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*learn) return cmd_learn_state(ls, load_config(config_path, "learn-state"), ls_flags);
    if (*load) return cmd_load_distribution(da, load_config(config_path, "load-distribution"), da_flags);
    if (*gen) return cmd_gen_images(ia, load_config(config_path, "gen-images"), ia_flags);
    if (*calibrate) return cmd_calibrate(cal_input, cal_out, load_config(config_path, "calibrate"), cal_flags);
    if (*selftest) return qgan::cli::run_selftest(std::cout) ? kExitOk : kExitRuntime;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const qgan::FitFailure& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
