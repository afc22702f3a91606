#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace qgan::cli {

/// Bad flags, bad target specs, missing inputs. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Buffers every output of a command and writes them together at the end,
/// followed by the manifest.
class OutputSet {
 public:
  OutputSet(std::filesystem::path dir, std::string experiment);

  void add(const std::string& relative, std::string contents);
  const std::filesystem::path& dir() const { return dir_; }

  /// Writes all files, then manifest.json listing them. Returns the manifest path.
  std::filesystem::path commit(const nlohmann::json& config, const nlohmann::json& seeds, const std::string& status);

 private:
  std::filesystem::path dir_;
  std::string experiment_;
  std::map<std::string, std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace qgan::cli
