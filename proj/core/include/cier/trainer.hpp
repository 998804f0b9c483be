#pragma once

#include "cier/agent.hpp"
#include "cier/envs.hpp"
#include "cier/pipeline.hpp"
#include "cier/replay.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cier::rl {

using series::EpisodeId;

struct EnvConfig {
  std::string kind = "planted";  // "planted" or "laneworld"
  LaneWorldConfig lane;
  PlantedFactorConfig planted = PlantedFactorConfig::defaults();
};

struct TrainConfig {
  EnvConfig env;
  AgentConfig agent;
  replay::ReplayConfig replay;
  pipeline::PipelineConfig pipeline = pipeline::PipelineConfig::defaults();
  int episodes = 300;
  /// Uniform-random actions and no learning for this many steps.
  int warmup_steps = 1000;
  int updates_per_step = 1;
  /// Abort when an episode score is non-finite or larger than this in magnitude.
  double divergence_bound = 1e6;
  /// Episodes per causal analysis: each request is topped up with the most
  /// recent already-analysed episodes up to this count (0 analyses only the
  /// episodes of the request).
  int analysis_window = 0;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

/// Result of one causal analysis during training.
struct EffectSnapshot {
  int episode = 0;  // index of the episode that triggered it
  std::uint64_t sequence = 0;
  std::size_t analysed_episodes = 0;
  int k_prime = 0;
  bool complete = false;
  std::vector<causal::FactorEffect> factors;
  std::size_t weighted_transitions = 0;
  /// Factor whose occurrences overlap the ground-truth motif the most, or -1
  /// (planted environment only).
  int planted_factor = -1;
  bool planted_relevant = false;
  std::string effects_json;
  std::string pag_dot;  // time-corrected graph
  std::vector<std::string> warnings;
};

struct EpisodeTruth {
  EpisodeId episode = 0;
  std::vector<MotifEvent> events;
};

struct RunResult {
  std::vector<double> scores;
  std::vector<EffectSnapshot> snapshots;
  std::vector<EpisodeTruth> truth;
  long long total_steps = 0;
  long long updates = 0;
};

using ProgressFn = std::function<void(int episode, double score)>;

/// Runs one seeded training run. Single-threaded and deterministic: equal
/// configs give bitwise-equal score sequences. Throws Diverged.
RunResult train(const TrainConfig& config, const ProgressFn& progress = {});

/// Factor with the largest number of steps shared with ground-truth motif
/// windows; -1 when no analysed episode contains the motif.
int identify_planted_factor(const tscf::OccurrenceMap& occurrences, const std::vector<EpisodeTruth>& truth);

/// Share of snapshots in which the planted factor was identified and marked
/// relevant; 0 when there are no snapshots. With skip_first the first
/// snapshot is left out (unless it is the only one): it is computed before
/// any causal weighting has been applied.
double planted_relevance_rate(const RunResult& run, bool skip_first = true);

}  // namespace cier::rl
