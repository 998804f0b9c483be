#pragma once

#include "cier/causal.hpp"
#include "cier/series.hpp"
#include "cier/ticc.hpp"
#include "cier/tscf.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cier::pipeline {

struct PipelineConfig {
  /// K is replaced per episode by adaptive_k when `adaptive` is set.
  ticc::TiccParams ticc;
  bool adaptive = true;
  ticc::AdaptiveKConfig adaptive_k;
  Eigen::Index min_segment_length = 3;
  tscf::ClusterOptions cluster;
  causal::GfciOptions gfci;
  causal::PathAggregation aggregation = causal::PathAggregation::Sum;
  /// Analyses over fewer usable episodes return an empty effect table.
  int min_episodes = 8;

  static PipelineConfig defaults();
};

struct AnalysisResult {
  std::vector<series::Subsequence> segments;
  std::vector<int> per_episode_k;
  tscf::TscfDictionary dictionary;
  tscf::Encoding encoding;
  causal::CausalDataset data;
  causal::GfciResult discovery;
  causal::Pag corrected;
  causal::CausalEffectTable effects;
  std::vector<std::string> warnings;
  /// False when the run stopped before causal discovery (too little data).
  bool complete = false;
};

/// Segments each episode's action series with TICC (on z-normalized frames),
/// clusters the raw-action segments into K' factors under DTW, encodes factor
/// presence per episode against the episode return, discovers and
/// time-corrects the causal graph, and scores every factor by its path
/// strength to the outcome.
AnalysisResult analyze(std::span<const series::ActionTimeSeries> episodes, const PipelineConfig& config,
                       std::uint64_t seed);

}  // namespace cier::pipeline
