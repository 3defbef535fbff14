#include "run_manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agnostic::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return fnv1a_hex(bytes.str());
}

ordered_json to_json(const DatasetSpec& spec) {
  return {{"n_target_per_class", spec.n_target_per_class},
          {"n_context_per_class", spec.n_context_per_class},
          {"n_test_per_class", spec.n_test_per_class},
          {"correlation", spec.correlation},
          {"image_size", spec.image_size},
          {"crop_size", spec.crop_size},
          {"noise_level", spec.noise_level},
          {"min_radius", spec.min_radius},
          {"max_radius", spec.max_radius},
          {"seed", spec.seed},
          {"context_shapes", spec.context_shapes}};
}

DatasetSpec dataset_spec_from_json(const json& j) {
  DatasetSpec spec;
  spec.n_target_per_class = j.at("n_target_per_class");
  spec.n_context_per_class = j.at("n_context_per_class");
  spec.n_test_per_class = j.at("n_test_per_class");
  spec.correlation = j.at("correlation");
  spec.image_size = j.at("image_size");
  spec.crop_size = j.at("crop_size");
  spec.noise_level = j.at("noise_level");
  spec.min_radius = j.at("min_radius");
  spec.max_radius = j.at("max_radius");
  spec.seed = j.at("seed");
  spec.context_shapes = j.at("context_shapes");
  return spec;
}

ordered_json to_json(const TrainConfig& cfg) {
  return {{"alpha_max", cfg.alpha_max},
          {"alpha_ramp_epochs", cfg.alpha_ramp_epochs},
          {"base_lr", cfg.base_lr},
          {"lr_decay_every", cfg.lr_decay_every},
          {"lr_decay_factor", cfg.lr_decay_factor},
          {"momentum", cfg.momentum},
          {"weight_decay", cfg.weight_decay},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"seed", cfg.seed},
          {"crop", cfg.crop},
          {"head_update", cfg.head_update == HeadUpdate::own_loss ? "own_loss" : "objective"}};
}

namespace {

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.alpha_max = j.at("alpha_max");
  cfg.alpha_ramp_epochs = j.at("alpha_ramp_epochs");
  cfg.base_lr = j.at("base_lr");
  cfg.lr_decay_every = j.at("lr_decay_every");
  cfg.lr_decay_factor = j.at("lr_decay_factor");
  cfg.momentum = j.at("momentum");
  cfg.weight_decay = j.at("weight_decay");
  cfg.batch_size = j.at("batch_size");
  cfg.epochs = j.at("epochs");
  cfg.seed = j.at("seed");
  cfg.crop = j.at("crop");
  cfg.head_update = j.at("head_update") == "own_loss" ? HeadUpdate::own_loss : HeadUpdate::objective;
  return cfg;
}

}  // namespace

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["tool"] = "agnostic";
  j["version"] = AGNOSTIC_VERSION;
  j["command"] = command;
  j["seed"] = seed;
  j["options"] = options;
  if (dataset_spec) j["dataset_spec"] = cli::to_json(*dataset_spec);
  if (dataset_hash) j["dataset_hash"] = *dataset_hash;
  if (train) j["train"] = cli::to_json(*train);
  if (architecture) {
    j["architecture"] = *architecture;
    j["architecture_hash"] = fnv1a_hex(*architecture);
  }
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command");
  m.seed = j.at("seed");
  m.options = j.at("options").get<std::map<std::string, std::string>>();
  if (j.contains("dataset_spec")) m.dataset_spec = dataset_spec_from_json(j["dataset_spec"]);
  if (j.contains("dataset_hash")) m.dataset_hash = j["dataset_hash"].get<std::string>();
  if (j.contains("train")) m.train = train_config_from_json(j["train"]);
  if (j.contains("architecture")) m.architecture = j["architecture"].get<std::string>();
  return m;
}

void write_run_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  std::ofstream out(dir / kRunManifestName);
  if (!out) throw std::runtime_error((dir / kRunManifestName).string() + ": cannot write");
  out << manifest.to_json().dump(2) << '\n';
}

RunManifest read_run_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  try {
    return RunManifest::from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace agnostic::cli
