#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relprobe/synth/planted_world.hpp"
#include "relprobe/trainer/dataset.hpp"
#include "relprobe/trainer/model.hpp"
#include "relprobe/trainer/trainer.hpp"

namespace relprobe::cli {

enum class Precision { Float32, Float64 };

struct Paths {
  std::filesystem::path prices;
  std::filesystem::path articles;
  std::optional<std::filesystem::path> hidden_states;  // JSON-lines index of RPHS files
  std::optional<std::filesystem::path> truth_edges;
  std::filesystem::path output = "runs";
};

struct ExperimentConfig {
  Paths paths;
  synth::WorldConfig world;
  std::uint64_t world_seed = 13423;
  train::ModelConfig model;
  train::DatasetConfig data;
  train::TrainConfig train;
  std::vector<std::string> baselines{"majority", "cooccurrence"};
  Precision precision = Precision::Float32;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every object is checked for unknown keys. Relative paths resolve against
// base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace relprobe::cli
