#pragma once

#include "cier/causal.hpp"
#include "cier/series.hpp"
#include "cier/sum_tree.hpp"
#include "cier/tscf.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace cier::replay {

using series::EpisodeId;
using series::Transition;

/// Quarter-ellipse curriculum: mu(e) = eta * sqrt(e_max^2 - e^2) / e_max.
struct CurriculumSchedule {
  int epsilon_m = 1000;  // maximum number of episodes
  double eta = 1.0;
};

/// Clamps epsilon_c into [0, epsilon_m] (with a warning) before evaluating.
double mu(int epsilon_c, const CurriculumSchedule& schedule);

enum class ReplayMode { Uniform, Per, Cier, Ciper };

std::string_view to_string(ReplayMode mode) noexcept;
ReplayMode parse_replay_mode(std::string_view text);

struct ReplayConfig {
  std::size_t capacity = 1'000'000;
  /// Transitions accumulated between causal re-analyses.
  std::size_t temp_capacity = 100'000;
  std::size_t batch = 256;
  ReplayMode mode = ReplayMode::Uniform;
  /// Share of the uniform component in cier/ciper; must be > 0 there.
  double lambda_u = 0.3;
  double per_alpha = 0.6;
  double per_beta0 = 0.4;  // annealed linearly to 1 over the curriculum
  double per_epsilon = 1e-3;
  double td_coeff = 0.5;
  double causal_coeff = 0.5;
  CurriculumSchedule curriculum;

  /// Throws ConfigError.
  void validate() const;
};

struct SampledBatch {
  std::vector<std::size_t> slots;
  std::vector<double> weights;  // importance weights, all 1 outside per/ciper
};

struct AnalysisRequest {
  std::uint64_t sequence = 0;
  std::vector<EpisodeId> episodes;
};

/// Ring-buffer experience replay whose sampling distribution mixes a uniform
/// component, causal weights c_i and TD priorities according to the mode:
///
///   uniform: 1
///   per:     (|d_i| + eps)^alpha
///   cier:    (1 - l) mu c_i / sum c + l / N
///   ciper:   (1 - l) [td (|d_i| + eps)^alpha / sum(...) + cc mu c_i / sum c] + l / N
///
/// The causal and TD terms live in separate sum trees; the final priority of
/// slot i is the sum of the scaled component leaves plus the uniform floor,
/// and sampling descends the composite prefix sum.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(ReplayConfig config);

  const ReplayConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return config_.capacity; }
  std::uint64_t total_pushed() const noexcept { return pushed_; }

  /// Stores a transition, evicting the oldest when full. Returns its slot.
  std::size_t push(Transition transition);

  const Transition& at(std::size_t slot) const { return storage_.at(slot); }
  double causal_weight(std::size_t slot) const { return causal_[slot]; }
  double td_magnitude(std::size_t slot) const { return td_[slot]; }

  /// Slot currently holding (episode, step), if still stored.
  std::optional<std::size_t> slot_of(EpisodeId episode, std::int64_t step) const;

  /// Sets the curriculum epoch (episodes so far): mu and PER beta follow it.
  void set_epoch(int epsilon_c);
  double current_mu() const noexcept { return mu_; }
  double current_beta() const noexcept { return beta_; }

  double priority(std::size_t slot) const;
  double probability(std::size_t slot) const;
  double total_priority() const;

  /// Stratified proportional sampling. Throws NotEnoughExperience.
  SampledBatch sample(std::size_t batch, std::mt19937_64& rng) const;

  void update_td(std::span<const std::size_t> slots, std::span<const double> td_errors);

  /// Replaces every causal weight at once (values in [0, 1], one per slot up
  /// to size()) and rebuilds the causal tree.
  void install_causal_weights(std::span<const double> weights);
  std::vector<double> causal_weights() const { return {causal_.begin(), causal_.begin() + static_cast<std::ptrdiff_t>(size_)}; }

  std::size_t temp_fill() const noexcept { return temp_fill_; }
  /// Emits the episodes accumulated since the last request once the
  /// temporary pool is full, and resets the pool.
  std::optional<AnalysisRequest> on_temp_full();

  /// One JSON object per stored transition: episode, step, c, td, priority.
  void write_snapshot(std::ostream& out) const;

 private:
  struct Mixture {
    double causal = 0.0;   // coefficient on c_i
    double td = 0.0;       // coefficient on (|d_i| + eps)^alpha
    double uniform = 0.0;  // constant per live slot
  };
  Mixture mixture() const;
  double td_leaf(double magnitude) const;

  ReplayConfig config_;
  std::vector<Transition> storage_;
  std::vector<double> causal_;
  std::vector<double> td_;
  SumTree causal_tree_;
  SumTree td_tree_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  std::uint64_t pushed_ = 0;
  double max_td_ = 1.0;
  double mu_ = 0.0;
  double beta_ = 0.4;

  std::map<EpisodeId, std::uint64_t> episode_first_seq_;
  std::vector<std::uint64_t> slot_seq_;

  std::size_t temp_fill_ = 0;
  std::uint64_t requests_ = 0;
  std::vector<EpisodeId> pending_episodes_;
};

/// For every relevant factor and each of its occurrence intervals, the
/// covered transitions get c = strength / max relevant strength; overlaps keep
/// the maximum. Transitions of episodes in the occurrence map that no relevant
/// factor covers get 0; other transitions keep their weight. An effect table
/// without relevant factors zeroes every weight. Returns the number of
/// transitions given a positive weight.
std::size_t assign_causal_weights(ReplayBuffer& buffer, const causal::CausalEffectTable& effects,
                                  const tscf::OccurrenceMap& occurrences);

}  // namespace cier::replay
