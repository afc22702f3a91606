#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "qgan/data.hpp"
#include "qgan/error.hpp"

namespace qgan::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> buf, std::size_t offset, const char* what) {
  if (buf.size() < offset + 4) throw ParseError(std::string("truncated header: missing ") + what, buf.size());
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

IdxDataset parse_mnist_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
  if (read_be32(images, 0, "image magic") != kImageMagic) throw ParseError("bad image magic number", 0);
  const std::uint32_t n_images = read_be32(images, 4, "image count");
  const std::uint32_t rows = read_be32(images, 8, "row count");
  const std::uint32_t cols = read_be32(images, 12, "column count");
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) throw ParseError("implausible image dimensions", 8);
  if (read_be32(labels, 0, "label magic") != kLabelMagic) throw ParseError("bad label magic number", 0);
  const std::uint32_t n_labels = read_be32(labels, 4, "label count");
  if (n_labels != n_images) throw ParseError("label count does not match image count", 4);

  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t image_bytes = 16 + pixels * n_images;
  if (images.size() < image_bytes) throw ParseError("truncated image payload", images.size());
  if (images.size() > image_bytes) throw ParseError("trailing bytes after image payload", image_bytes);
  const std::size_t label_bytes = 8 + std::size_t{n_labels};
  if (labels.size() < label_bytes) throw ParseError("truncated label payload", labels.size());
  if (labels.size() > label_bytes) throw ParseError("trailing bytes after label payload", label_bytes);

  IdxDataset out;
  out.rows = static_cast<int>(rows);
  out.cols = static_cast<int>(cols);
  out.images.reserve(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    LabeledImage img;
    const std::uint8_t label = labels[8 + i];
    if (label > 9) throw ParseError("label out of range 0-9", 8 + i);
    img.label = label;
    img.pixels.resize(pixels);
    for (std::size_t j = 0; j < pixels; ++j) img.pixels[j] = images[16 + i * pixels + j] / 255.0;
    out.images.push_back(std::move(img));
  }
  return out;
}

IdxDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  return parse_mnist_idx(images, labels);
}

std::vector<std::uint8_t> encode_idx_images(const IdxDataset& data) {
  std::vector<std::uint8_t> out;
  write_be32(out, kImageMagic);
  write_be32(out, static_cast<std::uint32_t>(data.images.size()));
  write_be32(out, static_cast<std::uint32_t>(data.rows));
  write_be32(out, static_cast<std::uint32_t>(data.cols));
  for (const auto& img : data.images) {
    if (img.pixels.size() != std::size_t(data.rows) * std::size_t(data.cols)) {
      throw InvalidArgument("encode_idx_images: image size does not match dimensions");
    }
    for (double v : img.pixels) {
      out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const IdxDataset& data) {
  std::vector<std::uint8_t> out;
  write_be32(out, kLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(data.images.size()));
  for (const auto& img : data.images) out.push_back(static_cast<std::uint8_t>(img.label));
  return out;
}

}  // namespace qgan::data
