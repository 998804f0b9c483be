#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace cier::series {

using EpisodeId = std::int64_t;

/// One environment step (s_t, a_t, r_t, s_{t+1}) tagged with its position in
/// the episode that produced it.
struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;
  EpisodeId episode_id = 0;
  std::int64_t step_index = 0;
};

/// The chronological action history of one episode. Row k of `frames` is the
/// action taken at step k.
struct ActionTimeSeries {
  EpisodeId episode_id = 0;
  Eigen::MatrixXd frames;  // n x d
  double episode_return = 0.0;

  Eigen::Index length() const noexcept { return frames.rows(); }
  Eigen::Index dim() const noexcept { return frames.cols(); }
};

/// Frames [start, end] (inclusive) of one episode's action series.
struct Subsequence {
  EpisodeId episode_id = 0;
  Eigen::Index start = 0;
  Eigen::Index end = 0;
  Eigen::MatrixXd values;  // (end - start + 1) x d

  Eigen::Index length() const noexcept { return end - start + 1; }
};

/// Throws EmptyEpisode, MixedEpisodes, NonContiguousSteps or DimensionMismatch.
ActionTimeSeries build_series(std::span<const Transition> transitions);

/// Per-dimension z-normalization with population standard deviation.
/// Constant dimensions map to zeros. Throws TooShort when n < 2.
ActionTimeSeries znormalize(const ActionTimeSeries& series);

/// Row t of the result is frames t..t+w-1 concatenated, giving an
/// (n - w + 1) x (d * w) matrix. Throws WindowTooLarge when w > n.
Eigen::MatrixXd window_stack(const ActionTimeSeries& series, Eigen::Index w);

Subsequence slice(const ActionTimeSeries& series, Eigen::Index start, Eigen::Index end);

/// Splits a flat transition log into per-episode runs, preserving first-seen
/// episode order.
std::vector<std::vector<Transition>> group_by_episode(std::span<const Transition> log);

}  // namespace cier::series
