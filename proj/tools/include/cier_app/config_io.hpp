#pragma once

#include "cier/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cier::app {

/// Everything `cier run` needs: one training configuration, the replay
/// modes to compare and the seeds to repeat each mode with.
struct ExperimentConfig {
  rl::TrainConfig train;
  std::vector<replay::ReplayMode> modes{replay::ReplayMode::Uniform};
  std::vector<std::uint64_t> seeds{0};
  /// When false, the curriculum horizon follows train.episodes.
  bool epsilon_m_explicit = false;
};

/// Desk-scale defaults: planted-factor environment, small networks and a
/// replay pool sized for a few hundred short episodes.
ExperimentConfig default_experiment();

/// Overlays a JSON document on the defaults. Unknown keys and out-of-range
/// values throw ConfigError.
ExperimentConfig parse_experiment(const nlohmann::json& doc, ExperimentConfig base = default_experiment());
nlohmann::json to_json(const ExperimentConfig& config);

/// Throws IoError when the file cannot be opened, ParseError on bad JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Applies the episode-count coupling and validates.
void finalize(ExperimentConfig& config);

}  // namespace cier::app
