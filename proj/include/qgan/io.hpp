#pragma once

// Serialization: history and target CSVs, JSON checkpoints, PGM images and a
// small SVG line-chart writer.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgan/chip.hpp"
#include "qgan/data.hpp"
#include "qgan/gan.hpp"
#include "qgan/nn.hpp"
#include "qgan/qcore.hpp"

namespace qgan::io {

using nlohmann::json;

/// Shortest decimal form that round-trips a double.
std::string format_double(double v);

/// `epoch,loss_g,loss_d,metric` with one row per record.
std::string history_csv(const gan::TrainingHistory& history);
gan::TrainingHistory parse_history_csv(const std::string& text);

/// `bin,probability`
std::string target_csv(const ProbVector& p);

/// Reads `current_mA,counts_per_s` rows (header required).
std::vector<chip::CalibrationSample> parse_calibration_csv(const std::string& text);
std::string calibration_csv(std::span<const chip::CalibrationSample> samples);

json to_json(const chip::HeaterCalibration& cal);
chip::HeaterCalibration calibration_from_json(const json& j);

/// {"real": [[..]], "imag": [[..]]}
json to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const json& j);

/// {"layer_sizes", "slope", "seed", "weights" (row-major per layer), "biases"}
json to_json(const nn::DenseNetwork& net);
nn::DenseNetwork network_from_json(const json& j);

/// {"mean", "components" (one array per component), "feature_min", "feature_max"}
json to_json(const data::PcaModel& model);
data::PcaModel pca_from_json(const json& j);

struct GrayImage {
  int width = 0;
  int height = 0;
  int max_value = 255;
  std::vector<int> pixels;  ///< row-major
};

/// Plain (P2) or raw (P5) PGM.
std::string encode_pgm(const GrayImage& image, bool plain = true);
GrayImage parse_pgm(const std::string& bytes);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const Series> series);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace qgan::io
