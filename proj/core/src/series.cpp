#include "cier/series.hpp"

#include "cier/error.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

namespace cier::series {

ActionTimeSeries build_series(std::span<const Transition> transitions) {
  if (transitions.empty()) fail(Errc::EmptyEpisode, "episode has no transitions");

  const EpisodeId id = transitions.front().episode_id;
  const Eigen::Index d = transitions.front().action.size();
  if (d < 1) fail(Errc::DimensionMismatch, "action dimension must be >= 1");

  ActionTimeSeries out;
  out.episode_id = id;
  out.frames.resize(static_cast<Eigen::Index>(transitions.size()), d);

  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const Transition& tr = transitions[k];
    if (tr.episode_id != id) {
      fail(Errc::MixedEpisodes, "episode " + std::to_string(tr.episode_id) + " mixed into episode " +
                                    std::to_string(id));
    }
    if (tr.step_index != static_cast<std::int64_t>(k)) {
      fail(Errc::NonContiguousSteps, "expected step " + std::to_string(k) + ", found " +
                                         std::to_string(tr.step_index));
    }
    if (tr.action.size() != d) {
      fail(Errc::DimensionMismatch, "action at step " + std::to_string(k) + " has dimension " +
                                        std::to_string(tr.action.size()) + ", expected " +
                                        std::to_string(d));
    }
    out.frames.row(static_cast<Eigen::Index>(k)) = tr.action.transpose();
    out.episode_return += tr.reward;
  }
  return out;
}

ActionTimeSeries znormalize(const ActionTimeSeries& series) {
  const Eigen::Index n = series.length();
  if (n < 2) fail(Errc::TooShort, "z-normalization needs at least two frames");

  ActionTimeSeries out = series;
  for (Eigen::Index j = 0; j < series.dim(); ++j) {
    auto col = out.frames.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
    // Saturated dimensions carry no shape information.
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
      col.setZero();
    } else {
      col /= sd;
    }
  }
  return out;
}

Eigen::MatrixXd window_stack(const ActionTimeSeries& series, Eigen::Index w) {
  const Eigen::Index n = series.length();
  const Eigen::Index d = series.dim();
  if (w < 1) fail(Errc::InvalidParams, "window must be >= 1");
  if (w > n) {
    fail(Errc::WindowTooLarge, "window " + std::to_string(w) + " exceeds series length " + std::to_string(n));
  }
  Eigen::MatrixXd out(n - w + 1, d * w);
  for (Eigen::Index t = 0; t + w <= n; ++t) {
    for (Eigen::Index k = 0; k < w; ++k) {
      out.block(t, k * d, 1, d) = series.frames.row(t + k);
    }
  }
  return out;
}

Subsequence slice(const ActionTimeSeries& series, Eigen::Index start, Eigen::Index end) {
  if (start < 0 || end < start || end >= series.length()) {
    fail(Errc::InvalidParams, "slice [" + std::to_string(start) + ", " + std::to_string(end) +
                                  "] outside series of length " + std::to_string(series.length()));
  }
  Subsequence s;
  s.episode_id = series.episode_id;
  s.start = start;
  s.end = end;
  s.values = series.frames.middleRows(start, end - start + 1);
  return s;
}

std::vector<std::vector<Transition>> group_by_episode(std::span<const Transition> log) {
  std::vector<std::vector<Transition>> out;
  std::unordered_map<EpisodeId, std::size_t> index;
  for (const Transition& tr : log) {
    auto [it, inserted] = index.try_emplace(tr.episode_id, out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(tr);
  }
  return out;
}

}  // namespace cier::series
