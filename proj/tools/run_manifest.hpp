#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "agnostic/dann.hpp"
#include "agnostic/dataset.hpp"
#include "agnostic/layer_spec.hpp"

namespace agnostic::cli {

inline constexpr const char* kRunManifestName = "manifest.json";

// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TrainConfig& cfg);

// Everything needed to rerun a command: the subcommand, every resolved
// option (defaults included), and descriptive copies of the configuration.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> options;
  std::optional<DatasetSpec> dataset_spec;
  std::optional<TrainConfig> train;
  std::optional<std::string> architecture;  // canonical text
  std::optional<std::string> dataset_hash;   // of the input dataset's manifest.csv

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

void write_run_manifest(const std::filesystem::path& dir, const RunManifest& manifest);
RunManifest read_run_manifest(const std::filesystem::path& path);

}  // namespace agnostic::cli
