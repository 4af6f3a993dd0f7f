#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace netdiff::cli {

/// Record written next to every output: what ran, with which inputs, and what
/// it produced. Contains no timestamps so identical runs give identical files.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  nlohmann::json& config() { return config_; }
  void add_seed(std::uint64_t seed) { seeds_.push_back(seed); }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  /// Writes the manifest to `path` (creating directories).
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  std::vector<std::uint64_t> seeds_;
  std::vector<std::pair<std::string, std::string>> inputs_, outputs_;
};

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// <out>.manifest.json for a file output, <out>/manifest.json for a directory.
std::filesystem::path manifest_path_for(const std::filesystem::path& out, bool directory);

}  // namespace netdiff::cli
