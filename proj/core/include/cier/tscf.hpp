#pragma once

#include "cier/series.hpp"
#include "cier/ticc.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cier::tscf {

using series::EpisodeId;
using series::Subsequence;

struct DtwOptions {
  /// Sakoe-Chiba band radius; unconstrained when empty. The band is widened
  /// to |len(a) - len(b)| so that a warping path always exists.
  std::optional<Eigen::Index> radius;
};

/// Dynamic time warping with Euclidean frame distance. Throws
/// DimensionMismatch when the frame dimensions differ.
double dtw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const DtwOptions& options = {});
double dtw(const Subsequence& a, const Subsequence& b, const DtwOptions& options = {});

/// Converts a window-level TICC segmentation into frame-level subsequences
/// that partition frames 0..n-1: run [s, e] covers frames [s, e], except the
/// final run, which extends to n-1. Runs shorter than `min_length` frames are
/// merged into their successor (the last one into its predecessor).
std::vector<Subsequence> extract_segments(const series::ActionTimeSeries& series,
                                          const ticc::Segmentation& segmentation, Eigen::Index min_length);

/// One time series causal factor: a cluster of similar subsequences.
struct Tscf {
  int id = 0;
  std::size_t medoid = 0;            // index into the segment corpus
  std::vector<std::size_t> members;  // indices into the segment corpus
  double mean_length = 0.0;
};

struct TscfDictionary {
  std::vector<Tscf> factors;
  /// assignment[i] is the factor of corpus segment i.
  std::vector<int> assignment;
  double total_cost = 0.0;
  /// Total within-cluster DTW after every assignment and medoid update.
  std::vector<double> cost_trace;
  int iterations = 0;

  int k_prime() const noexcept { return static_cast<int>(factors.size()); }
};

struct ClusterOptions {
  int max_iters = 50;
  DtwOptions dtw;
};

/// K'-medoids under DTW with farthest-point seeding. Throws ReduceKPrime when
/// there are fewer segments than k_prime.
TscfDictionary cluster_factors(std::span<const Subsequence> segments, int k_prime, std::uint64_t seed,
                               const ClusterOptions& options = {});

/// K'-medoids on a precomputed symmetric distance matrix.
TscfDictionary cluster_medoids(const Eigen::MatrixXd& distances, std::span<const Eigen::Index> lengths,
                               int k_prime, std::uint64_t seed, int max_iters = 50);

/// round(mean(per_episode_k)) with halves rounded up, at least 1.
int choose_k_prime(std::span<const int> per_episode_k);

struct Interval {
  Eigen::Index start = 0;
  Eigen::Index end = 0;  // inclusive

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// (episode, factor) -> frame intervals where that factor occurs.
class OccurrenceMap {
 public:
  void add(EpisodeId episode, int factor, Interval interval);
  const std::vector<Interval>& intervals(EpisodeId episode, int factor) const;
  std::optional<Eigen::Index> first_occurrence(EpisodeId episode, int factor) const;
  bool contains(EpisodeId episode, int factor) const;
  std::vector<EpisodeId> episodes() const;
  int factor_count() const noexcept { return factor_count_; }
  void set_factor_count(int k) noexcept { factor_count_ = k; }

  const std::map<std::pair<EpisodeId, int>, std::vector<Interval>>& raw() const noexcept { return map_; }

 private:
  std::map<std::pair<EpisodeId, int>, std::vector<Interval>> map_;
  int factor_count_ = 0;
};

struct EpisodeEncoding {
  EpisodeId episode_id = 0;
  std::vector<std::uint8_t> presence;  // U, length K'
  double outcome = 0.0;
};

struct EpisodeOutcome {
  EpisodeId episode_id = 0;
  double outcome = 0.0;
};

struct Encoding {
  std::vector<EpisodeEncoding> episodes;
  OccurrenceMap occurrences;
};

/// Builds U vectors and occurrence intervals. Episodes are emitted in the
/// order of `outcomes`. Throws InternalInconsistency for a segment without a
/// factor or whose episode has no outcome.
Encoding encode_episodes(const TscfDictionary& dictionary, std::span<const Subsequence> segments,
                         std::span<const EpisodeOutcome> outcomes);

std::string dictionary_to_json(const TscfDictionary& dictionary, std::span<const Subsequence> segments);

/// Encoding matrix CSV: `episode,U0..U{K'-1},outcome`.
void write_encoding_csv(std::ostream& out, std::span<const EpisodeEncoding> encodings);
std::vector<EpisodeEncoding> read_encoding_csv(std::istream& in);

}  // namespace cier::tscf
