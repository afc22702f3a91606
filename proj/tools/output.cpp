#include "output.hpp"

#include "qgan/io.hpp"

namespace qgan::cli {

namespace fs = std::filesystem;

OutputSet::OutputSet(fs::path dir, std::string experiment)
    : dir_(std::move(dir)), experiment_(std::move(experiment)), start_(std::chrono::steady_clock::now()) {}

void OutputSet::add(const std::string& relative, std::string contents) { files_[relative] = std::move(contents); }

fs::path OutputSet::commit(const nlohmann::json& config, const nlohmann::json& seeds, const std::string& status) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw UsageError("cannot create output directory " + dir_.string() + ": " + ec.message());
  nlohmann::json listed = nlohmann::json::array();
  for (const auto& [name, contents] : files_) {
    const fs::path path = dir_ / name;
    fs::create_directories(path.parent_path());
    io::write_text_file(path.string(), contents);
    listed.push_back(name);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  nlohmann::json manifest = {{"experiment", experiment_},
                             {"status", status},
                             {"config", config},
                             {"seeds", seeds},
                             {"version", QGAN_VERSION},
                             {"outputs", listed},
                             {"wall_clock_seconds", seconds}};
  const fs::path path = dir_ / "manifest.json";
  io::write_text_file(path.string(), manifest.dump(2) + "\n");
  return path;
}

}  // namespace qgan::cli
