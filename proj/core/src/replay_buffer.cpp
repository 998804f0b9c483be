#include "cier/error.hpp"
#include "cier/replay.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace cier::replay {

ReplayBuffer::ReplayBuffer(ReplayConfig config)
    : config_(std::move(config)),
      causal_tree_((config_.validate(), config_.capacity)),
      td_tree_(config_.capacity),
      beta_(config_.per_beta0) {
  storage_.resize(config_.capacity);
  causal_.assign(config_.capacity, 0.0);
  td_.assign(config_.capacity, 0.0);
  slot_seq_.assign(config_.capacity, 0);
  mu_ = mu(0, config_.curriculum);
}

double ReplayBuffer::td_leaf(double magnitude) const {
  return std::pow(magnitude + config_.per_epsilon, config_.per_alpha);
}

std::size_t ReplayBuffer::push(Transition transition) {
  const std::size_t slot = next_;
  const std::uint64_t seq = pushed_++;
  if (!episode_first_seq_.contains(transition.episode_id)) {
    episode_first_seq_[transition.episode_id] = seq - static_cast<std::uint64_t>(transition.step_index);
    pending_episodes_.push_back(transition.episode_id);
  }
  if (size_ == config_.capacity) {
    // Forget the evicted episode once its first transition leaves.
    const Transition& old = storage_[slot];
    auto it = episode_first_seq_.find(old.episode_id);
    if (it != episode_first_seq_.end() && old.step_index == 0 && old.episode_id != transition.episode_id) {
      episode_first_seq_.erase(it);
    }
  }
  storage_[slot] = std::move(transition);
  slot_seq_[slot] = seq;
  causal_[slot] = 0.0;
  td_[slot] = max_td_;
  causal_tree_.update(slot, 0.0);
  td_tree_.update(slot, td_leaf(max_td_));
  next_ = (next_ + 1) % config_.capacity;
  size_ = std::min(size_ + 1, config_.capacity);
  temp_fill_ = std::min(temp_fill_ + 1, config_.temp_capacity);
  return slot;
}

std::optional<std::size_t> ReplayBuffer::slot_of(EpisodeId episode, std::int64_t step) const {
  auto it = episode_first_seq_.find(episode);
  if (it == episode_first_seq_.end() || step < 0) return std::nullopt;
  const std::uint64_t seq = it->second + static_cast<std::uint64_t>(step);
  if (seq >= pushed_) return std::nullopt;
  if (pushed_ - seq > size_) return std::nullopt;
  const std::size_t slot = static_cast<std::size_t>(seq % config_.capacity);
  const Transition& tr = storage_[slot];
  if (slot_seq_[slot] != seq || tr.episode_id != episode || tr.step_index != step) return std::nullopt;
  return slot;
}

void ReplayBuffer::set_epoch(int epsilon_c) {
  mu_ = mu(epsilon_c, config_.curriculum);
  const double progress = std::clamp(static_cast<double>(epsilon_c) / config_.curriculum.epsilon_m, 0.0, 1.0);
  beta_ = config_.per_beta0 + (1.0 - config_.per_beta0) * progress;
}

ReplayBuffer::Mixture ReplayBuffer::mixture() const {
  Mixture m;
  if (size_ == 0) return m;
  const double n = static_cast<double>(size_);
  const double sum_c = causal_tree_.total();
  const double sum_d = td_tree_.total();
  const double l = config_.lambda_u;
  switch (config_.mode) {
    case ReplayMode::Uniform:
      m.uniform = 1.0;
      break;
    case ReplayMode::Per:
      m.td = 1.0;
      break;
    case ReplayMode::Cier:
      if (sum_c > 0.0) m.causal = (1.0 - l) * mu_ / sum_c;
      m.uniform = l / n;
      break;
    case ReplayMode::Ciper:
      if (sum_c > 0.0) m.causal = (1.0 - l) * config_.causal_coeff * mu_ / sum_c;
      if (sum_d > 0.0) m.td = (1.0 - l) * config_.td_coeff / sum_d;
      m.uniform = l / n;
      break;
  }
  return m;
}

double ReplayBuffer::priority(std::size_t slot) const {
  if (slot >= size_) fail(Errc::InvalidParams, "slot " + std::to_string(slot) + " is empty");
  const Mixture m = mixture();
  return m.causal * causal_[slot] + m.td * td_tree_.get(slot) + m.uniform;
}

double ReplayBuffer::total_priority() const {
  const Mixture m = mixture();
  return m.causal * causal_tree_.total() + m.td * td_tree_.total() + m.uniform * static_cast<double>(size_);
}

double ReplayBuffer::probability(std::size_t slot) const { return priority(slot) / total_priority(); }

SampledBatch ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const {
  if (batch == 0 || size_ < batch) {
    fail(Errc::NotEnoughExperience, std::to_string(size_) + " stored transitions, batch of " + std::to_string(batch));
  }
  const Mixture m = mixture();
  const double causal_mass = m.causal * causal_tree_.total();
  const double td_mass = m.td * td_tree_.total();
  const double uniform_mass = m.uniform * static_cast<double>(size_);
  const double total = causal_mass + td_mass + uniform_mass;
  if (!(total > 0.0)) fail(Errc::InternalInconsistency, "replay distribution has no mass");

  SampledBatch out;
  out.slots.reserve(batch);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double segment = total / static_cast<double>(batch);
  for (std::size_t j = 0; j < batch; ++j) {
    double u = (static_cast<double>(j) + unit(rng)) * segment;
    std::size_t slot = 0;
    if (u < causal_mass) {
      slot = causal_tree_.find(u / m.causal);
    } else if ((u -= causal_mass) < td_mass) {
      slot = td_tree_.find(u / m.td);
    } else {
      u -= td_mass;
      const double pos = m.uniform > 0.0 ? u / m.uniform : 0.0;
      slot = std::min(size_ - 1, static_cast<std::size_t>(std::max(0.0, pos)));
    }
    // Round-off at a component boundary can land past the live range.
    slot = std::min(slot, size_ - 1);
    out.slots.push_back(slot);
  }

  out.weights.assign(batch, 1.0);
  if (config_.mode == ReplayMode::Per || config_.mode == ReplayMode::Ciper) {
    double max_w = 0.0;
    for (std::size_t j = 0; j < batch; ++j) {
      const double p = priority(out.slots[j]) / total;
      out.weights[j] = std::pow(static_cast<double>(size_) * p, -beta_);
      max_w = std::max(max_w, out.weights[j]);
    }
    for (double& w : out.weights) w /= max_w;
  }
  return out;
}

void ReplayBuffer::update_td(std::span<const std::size_t> slots, std::span<const double> td_errors) {
  if (slots.size() != td_errors.size()) fail(Errc::ShapeError, "slot and TD error counts differ");
  for (std::size_t j = 0; j < slots.size(); ++j) {
    const std::size_t s = slots[j];
    if (s >= size_) fail(Errc::InvalidParams, "slot " + std::to_string(s) + " is empty");
    const double mag = std::abs(td_errors[j]);
    if (!std::isfinite(mag)) fail(Errc::Diverged, "non-finite TD error");
    td_[s] = mag;
    max_td_ = std::max(max_td_, mag);
    td_tree_.update(s, td_leaf(mag));
  }
}

void ReplayBuffer::install_causal_weights(std::span<const double> weights) {
  if (weights.size() != size_) fail(Errc::ShapeError, "causal weight count must equal the stored count");
  for (double c : weights) {
    if (!(c >= 0.0 && c <= 1.0)) fail(Errc::InvalidParams, "causal weights must lie in [0, 1]");
  }
  std::copy(weights.begin(), weights.end(), causal_.begin());
  std::fill(causal_.begin() + static_cast<std::ptrdiff_t>(size_), causal_.end(), 0.0);
  causal_tree_.rebuild(causal_);
}

std::optional<AnalysisRequest> ReplayBuffer::on_temp_full() {
  if (temp_fill_ < config_.temp_capacity) return std::nullopt;
  AnalysisRequest req;
  req.sequence = requests_++;
  req.episodes = std::move(pending_episodes_);
  pending_episodes_.clear();
  temp_fill_ = 0;
  return req;
}

void ReplayBuffer::write_snapshot(std::ostream& out) const {
  for (std::size_t s = 0; s < size_; ++s) {
    const Transition& tr = storage_[s];
    nlohmann::json j = {{"episode", tr.episode_id},
                        {"step", tr.step_index},
                        {"c", causal_[s]},
                        {"td", td_[s]},
                        {"priority", priority(s)}};
    out << j.dump() << '\n';
  }
}

std::size_t assign_causal_weights(ReplayBuffer& buffer, const causal::CausalEffectTable& effects,
                                  const tscf::OccurrenceMap& occurrences) {
  std::vector<double> c = buffer.causal_weights();
  const double max_s = effects.max_strength();
  if (!(max_s > 0.0)) {
    std::fill(c.begin(), c.end(), 0.0);
    buffer.install_causal_weights(c);
    return 0;
  }
  const std::vector<EpisodeId> analysed = occurrences.episodes();
  const std::set<EpisodeId> reset(analysed.begin(), analysed.end());
  for (std::size_t slot = 0; slot < c.size(); ++slot) {
    if (reset.count(buffer.at(slot).episode_id) != 0) c[slot] = 0.0;
  }
  std::size_t covered = 0;
  for (const causal::FactorEffect& f : effects.factors) {
    if (!f.relevant) continue;
    const double w = f.strength / max_s;
    for (EpisodeId ep : occurrences.episodes()) {
      for (const tscf::Interval& iv : occurrences.intervals(ep, f.factor)) {
        for (Eigen::Index t = iv.start; t <= iv.end; ++t) {
          if (auto s = buffer.slot_of(ep, t)) {
            if (c[*s] == 0.0 && w > 0.0) ++covered;
            c[*s] = std::max(c[*s], w);
          }
        }
      }
    }
  }
  buffer.install_causal_weights(c);
  return covered;
}

}  // namespace cier::replay
