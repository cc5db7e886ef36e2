#pragma once
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace chartduel::cli {

/// What a run consumed and produced. Contains nothing time-dependent, so two
/// runs with the same seed and inputs write identical manifests.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;  // path -> sha256 hex
  std::vector<std::string> outputs;
  std::string tool_version;

  void add_input(const std::filesystem::path& p);
  nlohmann::ordered_json to_json() const;
};

/// Lowercase hex SHA-256 of a file's bytes. Throws std::runtime_error.
std::string sha256_file(const std::filesystem::path& p);

std::string tool_version();

}  // namespace chartduel::cli
