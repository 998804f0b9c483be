#include "cier/pipeline.hpp"

#include "cier/error.hpp"

#include <algorithm>
#include <string>

namespace cier::pipeline {

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.ticc.beta = 5.0;
  c.ticc.max_em_iters = 20;
  c.ticc.admm_iters = 300;
  c.ticc.tol = 1e-4;
  return c;
}

AnalysisResult analyze(std::span<const series::ActionTimeSeries> episodes, const PipelineConfig& config,
                       std::uint64_t seed) {
  AnalysisResult out;
  std::vector<tscf::EpisodeOutcome> outcomes;

  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const series::ActionTimeSeries& raw = episodes[e];
    try {
      const series::ActionTimeSeries norm = series::znormalize(raw);
      ticc::TiccParams p = config.ticc;
      if (config.adaptive) {
        ticc::AdaptiveKConfig ak = config.adaptive_k;
        ak.w = p.w;
        p.K = ticc::adaptive_k(raw.length(), ak);
      }
      p.seed = seed + e;
      const ticc::TiccFit fit = ticc::fit_ticc(norm, p);
      for (const std::string& w : fit.warnings) out.warnings.push_back("episode " + std::to_string(raw.episode_id) + ": " + w);
      std::vector<series::Subsequence> segs = tscf::extract_segments(raw, fit.segmentation, config.min_segment_length);
      out.segments.insert(out.segments.end(), std::make_move_iterator(segs.begin()), std::make_move_iterator(segs.end()));
      out.per_episode_k.push_back(p.K);
      outcomes.push_back({raw.episode_id, raw.episode_return});
    } catch (const Error& err) {
      // Episodes too short to segment are left out of this analysis.
      if (err.code() != Errc::TooShort && err.code() != Errc::NotEnoughData && err.code() != Errc::WindowTooLarge) {
        throw;
      }
      out.warnings.push_back("episode " + std::to_string(raw.episode_id) + " skipped: " + err.what());
    }
  }

  if (static_cast<int>(outcomes.size()) < std::max(2, config.min_episodes) || out.segments.empty()) {
    out.warnings.push_back("only " + std::to_string(outcomes.size()) + " usable episodes; causal analysis skipped");
    return out;
  }

  int k_prime = tscf::choose_k_prime(out.per_episode_k);
  k_prime = std::min<int>(k_prime, static_cast<int>(out.segments.size()));
  out.dictionary = tscf::cluster_factors(out.segments, k_prime, seed, config.cluster);
  out.encoding = tscf::encode_episodes(out.dictionary, out.segments, outcomes);

  out.data = causal::CausalDataset::from_encodings(out.encoding.episodes);
  causal::GfciOptions g = config.gfci;
  g.seed = seed;
  out.discovery = causal::gfci_lite(out.data, g);
  out.warnings.insert(out.warnings.end(), out.discovery.warnings.begin(), out.discovery.warnings.end());
  std::vector<std::string> tc_warnings;
  out.corrected = causal::time_correction(out.discovery.pag, out.encoding.occurrences, &tc_warnings);
  out.warnings.insert(out.warnings.end(), tc_warnings.begin(), tc_warnings.end());
  out.effects = causal::path_strengths(out.corrected, out.data, config.aggregation);
  out.warnings.insert(out.warnings.end(), out.effects.warnings.begin(), out.effects.warnings.end());
  out.complete = true;
  return out;
}

}  // namespace cier::pipeline
