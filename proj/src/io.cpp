#include "qgan/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qgan/error.hpp"

namespace qgan::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

double parse_number(const std::string& cell, int line) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InvalidArgument("line " + std::to_string(line) + ": '" + t + "' is not a number");
  }
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string history_csv(const gan::TrainingHistory& history) {
  std::string out = "epoch,loss_g,loss_d,metric\n";
  for (const auto& r : history.records) {
    out += std::to_string(r.epoch) + ',' + format_double(r.loss_g) + ',' + format_double(r.loss_d) + ',' +
           format_double(r.metric) + '\n';
  }
  return out;
}

gan::TrainingHistory parse_history_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || trim(lines.front()) != "epoch,loss_g,loss_d,metric") {
    throw InvalidArgument("history CSV: missing header");
  }
  gan::TrainingHistory h;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 4) throw InvalidArgument("history CSV: line " + std::to_string(i + 1) + " needs 4 fields");
    const int line = static_cast<int>(i + 1);
    h.records.push_back({static_cast<int>(parse_number(cells[0], line)), parse_number(cells[1], line),
                         parse_number(cells[2], line), parse_number(cells[3], line), {}});
  }
  return h;
}

std::string target_csv(const ProbVector& p) {
  std::string out = "bin,probability\n";
  for (int i = 0; i < p.size(); ++i) out += std::to_string(i) + ',' + format_double(p[i]) + '\n';
  return out;
}

std::vector<chip::CalibrationSample> parse_calibration_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw InvalidArgument("calibration CSV: empty input");
  const auto header = split(lines.front(), ',');
  if (header.size() != 2 || trim(header[0]) != "current_mA" || trim(header[1]) != "counts_per_s") {
    throw InvalidArgument("calibration CSV: header must be 'current_mA,counts_per_s'");
  }
  std::vector<chip::CalibrationSample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    const int line = static_cast<int>(i + 1);
    if (cells.size() != 2) throw InvalidArgument("calibration CSV: line " + std::to_string(line) + " needs 2 fields");
    out.push_back({parse_number(cells[0], line), parse_number(cells[1], line)});
  }
  return out;
}

std::string calibration_csv(std::span<const chip::CalibrationSample> samples) {
  std::string out = "current_mA,counts_per_s\n";
  for (const auto& s : samples) out += format_double(s.current_ma) + ',' + format_double(s.counts_per_s) + '\n';
  return out;
}

json to_json(const chip::HeaterCalibration& cal) {
  return {{"a", cal.a}, {"alpha", cal.alpha}, {"beta", cal.beta}, {"b", cal.b}, {"rms", cal.rms}};
}

chip::HeaterCalibration calibration_from_json(const json& j) {
  chip::HeaterCalibration cal;
  cal.a = j.at("a").get<double>();
  cal.alpha = j.at("alpha").get<double>();
  cal.beta = j.at("beta").get<double>();
  cal.b = j.at("b").get<double>();
  cal.rms = j.value("rms", 0.0);
  return cal;
}

json to_json(const DensityMatrix& rho) {
  json re = json::array(), im = json::array();
  for (int r = 0; r < rho.dim(); ++r) {
    json rr = json::array(), ii = json::array();
    for (int c = 0; c < rho.dim(); ++c) {
      rr.push_back(rho(r, c).real());
      ii.push_back(rho(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"real", re}, {"imag", im}};
}

DensityMatrix density_from_json(const json& j) {
  const auto& re = j.at("real");
  const auto& im = j.at("imag");
  const auto n = static_cast<Eigen::Index>(re.size());
  if (n != 2 && n != 4) throw InvalidArgument("density JSON: matrix must be 2x2 or 4x4");
  if (static_cast<Eigen::Index>(im.size()) != n) throw InvalidArgument("density JSON: real/imag shape mismatch");
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(re[r].size()) != n || static_cast<Eigen::Index>(im[r].size()) != n) {
      throw InvalidArgument("density JSON: rows must be square");
    }
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = {re[r][c].get<double>(), im[r][c].get<double>()};
  }
  return DensityMatrix(m);
}

json to_json(const nn::DenseNetwork& net) {
  json weights = json::array(), biases = json::array();
  for (int l = 0; l < net.depth(); ++l) {
    const Eigen::MatrixXd& w = net.weights(l);
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    weights.push_back(flat);
    biases.push_back(vec(net.biases(l)));
  }
  return {{"layer_sizes", net.layer_sizes()},
          {"slope", net.slope()},
          {"seed", net.init_seed()},
          {"weights", weights},
          {"biases", biases}};
}

nn::DenseNetwork network_from_json(const json& j) {
  nn::DenseNetwork net(j.at("layer_sizes").get<std::vector<int>>(), j.value("slope", nn::kDefaultSlope));
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (static_cast<int>(weights.size()) != net.depth() || static_cast<int>(biases.size()) != net.depth()) {
    throw InvalidArgument("network JSON: layer count mismatch");
  }
  for (int l = 0; l < net.depth(); ++l) {
    const auto rows = net.weights(l).rows(), cols = net.weights(l).cols();
    const auto flat = weights[l].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols) throw InvalidArgument("network JSON: weight shape");
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    net.set_layer(l, std::move(w), eigen(biases[l].get<std::vector<double>>()));
  }
  net.set_init_seed(j.value("seed", std::uint64_t{0}));
  return net;
}

json to_json(const data::PcaModel& model) {
  json comps = json::array();
  for (int c = 0; c < model.k(); ++c) comps.push_back(vec(model.components.col(c)));
  return {{"mean", vec(model.mean)},
          {"components", comps},
          {"feature_min", vec(model.feature_min)},
          {"feature_max", vec(model.feature_max)}};
}

data::PcaModel pca_from_json(const json& j) {
  data::PcaModel m;
  m.mean = eigen(j.at("mean").get<std::vector<double>>());
  const auto& comps = j.at("components");
  m.components.resize(m.mean.size(), static_cast<Eigen::Index>(comps.size()));
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto v = comps[c].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != m.mean.size()) throw InvalidArgument("PCA JSON: component length");
    m.components.col(static_cast<Eigen::Index>(c)) = eigen(v);
  }
  m.feature_min = eigen(j.at("feature_min").get<std::vector<double>>());
  m.feature_max = eigen(j.at("feature_max").get<std::vector<double>>());
  if (m.feature_min.size() != m.components.cols() || m.feature_max.size() != m.components.cols()) {
    throw InvalidArgument("PCA JSON: feature range length");
  }
  return m;
}

std::string encode_pgm(const GrayImage& image, bool plain) {
  if (image.width < 1 || image.height < 1 || image.max_value < 1 || image.max_value > 255 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height)) {
    throw InvalidArgument("encode_pgm: bad image shape");
  }
  std::string out = std::string(plain ? "P2" : "P5") + '\n' + std::to_string(image.width) + ' ' +
                    std::to_string(image.height) + '\n' + std::to_string(image.max_value) + '\n';
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const int v = std::clamp(image.pixels[static_cast<std::size_t>(r * image.width + c)], 0, image.max_value);
      if (plain) {
        out += std::to_string(v);
        out += c + 1 == image.width ? '\n' : ' ';
      } else {
        out += static_cast<char>(v);
      }
    }
  }
  return out;
}

GrayImage parse_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto integer = [&](const char* what) {
    skip();
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos == start) throw ParseError(std::string("PGM: expected ") + what, start);
    return std::stoi(bytes.substr(start, pos - start));
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError("PGM: bad magic", 0);
  }
  const bool plain = bytes[1] == '2';
  pos = 2;
  GrayImage img;
  img.width = integer("width");
  img.height = integer("height");
  img.max_value = integer("max value");
  if (img.width < 1 || img.height < 1 || img.max_value < 1 || img.max_value > 255) {
    throw ParseError("PGM: bad header values", pos);
  }
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.pixels.reserve(n);
  if (plain) {
    for (std::size_t i = 0; i < n; ++i) {
      const int v = integer("pixel");
      if (v > img.max_value) throw ParseError("PGM: pixel above max value", pos);
      img.pixels.push_back(v);
    }
  } else {
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      throw ParseError("PGM: missing separator before raster", pos);
    }
    ++pos;
    if (bytes.size() - pos != n) throw ParseError("PGM: raster size mismatch", bytes.size());
    for (std::size_t i = 0; i < n; ++i) img.pixels.push_back(static_cast<unsigned char>(bytes[pos + i]));
  }
  return img;
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const Series> series) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  const auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape_xml(title)
      << "</text>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << (kTop + kH - kBottom) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (kTop + kH - kBottom) / 2 << ")\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = y0 + (y1 - y0) * t / 4.0;
    const double xv = x0 + (x1 - x0) * t / 4.0;
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
        << format_double(std::round(yv * 1e4) / 1e4) << "</text>\n"
        << "<text x=\"" << px(xv) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << format_double(std::round(xv * 1e4) / 1e4) << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    out << "\"/>\n"
        << "<text x=\"" << kW - kRight - 4 << "\" y=\"" << kTop + 14 * (k + 1) << "\" text-anchor=\"end\" fill=\""
        << color << "\" font-size=\"11\">" << escape_xml(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace qgan::io
