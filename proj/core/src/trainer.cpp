#include "cier/trainer.hpp"

#include "cier/error.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <span>
#include <string>

namespace cier::rl {

void TrainConfig::validate() const {
  if (episodes < 1) fail(Errc::ConfigError, "episodes must be >= 1");
  if (warmup_steps < 0) fail(Errc::ConfigError, "warmup_steps must be >= 0");
  if (updates_per_step < 0) fail(Errc::ConfigError, "updates_per_step must be >= 0");
  if (!(divergence_bound > 0.0)) fail(Errc::ConfigError, "divergence_bound must be positive");
  if (analysis_window < 0) fail(Errc::ConfigError, "analysis_window must be >= 0");
  agent.validate();
  replay.validate();
  pipeline.ticc.validate();
}

int identify_planted_factor(const tscf::OccurrenceMap& occurrences, const std::vector<EpisodeTruth>& truth) {
  std::vector<long long> overlap(static_cast<std::size_t>(occurrences.factor_count()), 0);
  for (const EpisodeTruth& t : truth) {
    for (const MotifEvent& ev : t.events) {
      for (int k = 0; k < occurrences.factor_count(); ++k) {
        for (const tscf::Interval& iv : occurrences.intervals(t.episode, k)) {
          const auto lo = std::max<std::int64_t>(iv.start, ev.start);
          const auto hi = std::min<std::int64_t>(iv.end, ev.end);
          if (hi >= lo) overlap[static_cast<std::size_t>(k)] += hi - lo + 1;
        }
      }
    }
  }
  int best = -1;
  long long best_overlap = 0;
  for (std::size_t k = 0; k < overlap.size(); ++k) {
    if (overlap[k] > best_overlap) {
      best_overlap = overlap[k];
      best = static_cast<int>(k);
    }
  }
  return best;
}

double planted_relevance_rate(const RunResult& run, bool skip_first) {
  const std::size_t from = skip_first && run.snapshots.size() > 1 ? 1 : 0;
  if (run.snapshots.size() <= from) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = from; i < run.snapshots.size(); ++i) hits += run.snapshots[i].planted_relevant ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(run.snapshots.size() - from);
}

namespace {

Minibatch gather(const replay::ReplayBuffer& buffer, const replay::SampledBatch& sampled, int m, int d) {
  const auto n = static_cast<Eigen::Index>(sampled.slots.size());
  Minibatch b;
  b.states.resize(m, n);
  b.actions.resize(d, n);
  b.rewards.resize(n);
  b.next_states.resize(m, n);
  b.dones.resize(n);
  b.weights.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const series::Transition& tr = buffer.at(sampled.slots[static_cast<std::size_t>(j)]);
    b.states.col(j) = tr.state;
    b.actions.col(j) = tr.action;
    b.rewards[j] = tr.reward;
    b.next_states.col(j) = tr.next_state;
    b.dones[j] = tr.done ? 1.0 : 0.0;
    b.weights[j] = sampled.weights[static_cast<std::size_t>(j)];
  }
  return b;
}

}  // namespace

RunResult train(const TrainConfig& config, const ProgressFn& progress) {
  config.validate();
  std::unique_ptr<Environment> env = make_environment(config.env.kind, config.env.lane, config.env.planted);
  auto* planted = dynamic_cast<PlantedFactorEnv*>(env.get());
  const EnvSpec& spec = env->spec();

  // Independent streams so that, e.g., extra sampling in one mode does not
  // shift the environment's randomness.
  std::seed_seq seq{config.seed, std::uint64_t{0x43494552}};
  std::array<std::uint64_t, 5> seeds{};
  seq.generate(seeds.begin(), seeds.end());
  std::mt19937_64 act_rng(seeds[0]);
  std::mt19937_64 sample_rng(seeds[1]);
  std::mt19937_64 update_rng(seeds[2]);
  const std::uint64_t env_seed = seeds[3];
  const std::uint64_t analysis_seed = seeds[4];

  Agent agent(spec, config.agent, config.seed);
  replay::ReplayBuffer buffer(config.replay);
  const bool causal_mode =
      config.replay.mode == replay::ReplayMode::Cier || config.replay.mode == replay::ReplayMode::Ciper;
  const bool td_mode = config.replay.mode == replay::ReplayMode::Per || config.replay.mode == replay::ReplayMode::Ciper;

  RunResult result;
  std::map<EpisodeId, series::ActionTimeSeries> pending;
  // Already analysed episodes kept to top up small requests.
  std::deque<series::ActionTimeSeries> history;

  for (int ep = 0; ep < config.episodes; ++ep) {
    buffer.set_epoch(ep);
    Eigen::VectorXd state = env->reset(env_seed + static_cast<std::uint64_t>(ep));
    std::vector<series::Transition> episode;
    episode.reserve(static_cast<std::size_t>(spec.max_steps));
    bool done = false;
    while (!done) {
      const Eigen::VectorXd action =
          result.total_steps < config.warmup_steps ? agent.random_action(act_rng) : agent.explore(state, act_rng);
      StepResult r = env->step(action);
      series::Transition tr{state, action, r.reward, r.next_state, r.done, ep, static_cast<std::int64_t>(episode.size())};
      buffer.push(tr);
      episode.push_back(std::move(tr));
      state = std::move(r.next_state);
      done = r.done;
      ++result.total_steps;

      if (result.total_steps >= config.warmup_steps && buffer.size() >= config.replay.batch) {
        for (int u = 0; u < config.updates_per_step; ++u) {
          const replay::SampledBatch s = buffer.sample(config.replay.batch, sample_rng);
          const UpdateStats st = agent.update(gather(buffer, s, spec.state_dim, spec.action_dim), update_rng);
          if (td_mode) {
            buffer.update_td(s.slots, std::span<const double>(st.td_errors.data(), static_cast<std::size_t>(st.td_errors.size())));
          }
          ++result.updates;
        }
      }
    }

    const double score = env->episode_return();
    if (!std::isfinite(score) || std::abs(score) > config.divergence_bound || !agent.finite()) {
      fail(Errc::Diverged, "episode " + std::to_string(ep) + " scored " + std::to_string(score));
    }
    result.scores.push_back(score);
    result.truth.push_back({ep, planted ? planted->motif_events() : std::vector<MotifEvent>{}});
    if (progress) progress(ep, score);

    if (!causal_mode) continue;
    series::ActionTimeSeries s = series::build_series(episode);
    s.episode_return = score;
    pending.emplace(ep, std::move(s));

    if (auto req = buffer.on_temp_full()) {
      std::vector<series::ActionTimeSeries> fresh;
      for (EpisodeId id : req->episodes) {
        auto it = pending.find(id);
        if (it == pending.end()) continue;
        fresh.push_back(std::move(it->second));
        pending.erase(it);
      }
      const std::size_t window = std::max(static_cast<std::size_t>(config.analysis_window), fresh.size());
      const std::size_t carried = std::min(history.size(), window - fresh.size());
      std::vector<series::ActionTimeSeries> batch(history.end() - static_cast<std::ptrdiff_t>(carried), history.end());
      batch.insert(batch.end(), fresh.begin(), fresh.end());
      for (auto& f : fresh) history.push_back(std::move(f));
      while (history.size() > static_cast<std::size_t>(config.analysis_window)) history.pop_front();
      std::vector<EpisodeTruth> truth;
      for (const auto& b : batch) truth.push_back(result.truth[static_cast<std::size_t>(b.episode_id)]);
      const pipeline::AnalysisResult a = pipeline::analyze(batch, config.pipeline, analysis_seed + req->sequence);

      EffectSnapshot snap;
      snap.episode = ep;
      snap.sequence = req->sequence;
      snap.analysed_episodes = batch.size();
      snap.complete = a.complete;
      snap.k_prime = a.dictionary.k_prime();
      snap.factors = a.effects.factors;
      snap.warnings = a.warnings;
      if (a.complete) {
        snap.weighted_transitions = replay::assign_causal_weights(buffer, a.effects, a.encoding.occurrences);
        snap.effects_json = causal::effects_to_json(a.effects, a.data.names);
        snap.pag_dot = causal::to_dot(a.corrected, a.data.names);
        if (planted) {
          snap.planted_factor = identify_planted_factor(a.encoding.occurrences, truth);
          for (const causal::FactorEffect& f : a.effects.factors) {
            if (f.factor == snap.planted_factor) snap.planted_relevant = f.relevant;
          }
        }
      } else {
        const causal::CausalEffectTable empty;
        replay::assign_causal_weights(buffer, empty, a.encoding.occurrences);
      }
      result.snapshots.push_back(std::move(snap));
    }
  }
  return result;
}

}  // namespace cier::rl
