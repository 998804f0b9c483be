#include "cier_app/config_io.hpp"

#include "cier/error.hpp"

#include <fstream>
#include <set>
#include <string>
#include <type_traits>

namespace cier::app {

using nlohmann::json;

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  rl::TrainConfig& t = c.train;
  t.episodes = 200;
  t.warmup_steps = 1000;
  t.agent.actor_hidden = {64, 64};
  t.agent.critic_hidden = {64, 64};
  t.agent.exploration_sigma = 0.2;
  t.agent.tau = 0.01;
  t.replay.capacity = 100'000;
  t.replay.temp_capacity = 1'000;
  t.replay.batch = 128;
  t.analysis_window = 100;
  t.pipeline.gfci.alpha = 0.05;
  t.pipeline.adaptive_k.target_length = 10.0;
  return c;
}

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(Errc::ConfigError, path_ + " must be a JSON object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      const json& v = j_.at(key);
      if (!v.is_number_unsigned()) fail(Errc::ConfigError, path_ + "." + key + " must be a non-negative integer");
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(Errc::ConfigError, path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.contains(item.key())) fail(Errc::ConfigError, "unknown key " + path_ + "." + item.key());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, const std::string& where) {
  if (rows.empty()) fail(Errc::ConfigError, where + " must be a nonempty list of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) fail(Errc::ConfigError, where + " rows differ in length");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
  }
  return rows;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void read_planted(const json& j, rl::PlantedFactorConfig& p) {
  Section s(j, "env.planted");
  s.get("action_dim", p.action_dim);
  s.get("episode_length", p.episode_length);
  s.get("delay", p.delay);
  s.get("pulse", p.pulse);
  s.get("noise_sigma", p.noise_sigma);
  s.get("effort_cost", p.effort_cost);
  s.get("armed_probability", p.armed_probability);
  s.get("unarmed_pulse", p.unarmed_pulse);
  s.get("gamma", p.gamma);
  if (const json* m = s.child("motif")) {
    p.motif = to_matrix(m->get<std::vector<std::vector<double>>>(), s.path("motif"));
  } else if (p.motif.cols() != p.action_dim) {
    const Eigen::Index len = p.motif.rows() > 0 ? p.motif.rows() : 5;
    p.motif = Eigen::MatrixXd::Zero(len, p.action_dim);
    p.motif.col(0).setConstant(0.6);
  }
  if (const json* t = s.child("tolerance")) {
    const auto v = t->get<std::vector<double>>();
    p.tolerance = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else if (p.tolerance.size() != p.action_dim) {
    p.tolerance = Eigen::VectorXd::Constant(p.action_dim, 1.0);
    p.tolerance[0] = 0.4;
  }
  s.finish();
}

void read_lane(const json& j, rl::LaneWorldConfig& l) {
  Section s(j, "env.laneworld");
  s.get("a", l.a);
  s.get("b", l.b);
  s.get("v_min", l.v_min);
  s.get("v_max", l.v_max);
  s.get("initial_speed", l.initial_speed);
  s.get("lanes", l.lanes);
  s.get("obstacles", l.obstacles);
  s.get("max_steps", l.max_steps);
  s.get("accel", l.accel);
  s.get("steer_rate", l.steer_rate);
  s.get("distance_scale", l.distance_scale);
  s.get("obstacle_speed", l.obstacle_speed);
  s.get("view", l.view);
  s.get("gamma", l.gamma);
  s.finish();
}

void read_agent(const json& j, rl::AgentConfig& a) {
  Section s(j, "agent");
  std::string algorithm(rl::to_string(a.algorithm));
  s.get("algorithm", algorithm);
  a.algorithm = rl::parse_algorithm(algorithm);
  s.get("actor_hidden", a.actor_hidden);
  s.get("critic_hidden", a.critic_hidden);
  s.get("actor_lr", a.actor_lr);
  s.get("critic_lr", a.critic_lr);
  s.get("tau", a.tau);
  s.get("exploration_sigma", a.exploration_sigma);
  s.get("policy_delay", a.policy_delay);
  s.get("target_sigma", a.target_sigma);
  s.get("target_clip", a.target_clip);
  s.finish();
}

void read_replay(const json& j, replay::ReplayConfig& r, bool& epsilon_m_explicit) {
  Section s(j, "replay");
  s.get("capacity", r.capacity);
  s.get("temp_capacity", r.temp_capacity);
  s.get("batch", r.batch);
  s.get("lambda_u", r.lambda_u);
  s.get("per_alpha", r.per_alpha);
  s.get("per_beta0", r.per_beta0);
  s.get("per_epsilon", r.per_epsilon);
  s.get("td_coeff", r.td_coeff);
  s.get("causal_coeff", r.causal_coeff);
  s.get("eta", r.curriculum.eta);
  if (const json* e = s.child("epsilon_m")) {
    r.curriculum.epsilon_m = e->get<int>();
    epsilon_m_explicit = true;
  }
  s.finish();
}

void read_pipeline(const json& j, pipeline::PipelineConfig& p) {
  Section s(j, "pipeline");
  if (const json* t = s.child("ticc")) {
    Section ts(*t, "pipeline.ticc");
    ts.get("K", p.ticc.K);
    ts.get("w", p.ticc.w);
    ts.get("beta", p.ticc.beta);
    ts.get("lambda", p.ticc.lambda);
    ts.get("max_em_iters", p.ticc.max_em_iters);
    ts.get("admm_iters", p.ticc.admm_iters);
    ts.get("tol", p.ticc.tol);
    ts.finish();
  }
  if (const json* a = s.child("adaptive_k")) {
    Section as(*a, "pipeline.adaptive_k");
    as.get("enabled", p.adaptive);
    as.get("target_length", p.adaptive_k.target_length);
    as.get("k_min", p.adaptive_k.k_min);
    as.get("k_max", p.adaptive_k.k_max);
    as.finish();
  }
  s.get("min_segment_length", p.min_segment_length);
  s.get("kmedoids_iters", p.cluster.max_iters);
  if (const json* r = s.child("dtw_radius")) {
    if (r->is_null()) {
      p.cluster.dtw.radius.reset();
    } else {
      p.cluster.dtw.radius = r->get<Eigen::Index>();
    }
  }
  s.get("alpha", p.gfci.alpha);
  s.get("restarts", p.gfci.restarts);
  s.get("max_sepset", p.gfci.max_sepset);
  s.get("min_episodes", p.min_episodes);
  std::string agg = p.aggregation == causal::PathAggregation::Sum ? "sum" : "product";
  s.get("aggregation", agg);
  if (agg == "sum") {
    p.aggregation = causal::PathAggregation::Sum;
  } else if (agg == "product") {
    p.aggregation = causal::PathAggregation::Product;
  } else {
    fail(Errc::ConfigError, "pipeline.aggregation must be 'sum' or 'product'");
  }
  s.finish();
}

}  // namespace

ExperimentConfig parse_experiment(const json& doc, ExperimentConfig base) {
  ExperimentConfig c = std::move(base);
  rl::TrainConfig& t = c.train;
  try {
    Section root(doc, "config");
    if (const json* e = root.child("env")) {
      Section es(*e, "env");
      es.get("kind", t.env.kind);
      if (const json* p = es.child("planted")) read_planted(*p, t.env.planted);
      if (const json* l = es.child("laneworld")) read_lane(*l, t.env.lane);
      es.finish();
    }
    if (const json* a = root.child("agent")) read_agent(*a, t.agent);
    if (const json* r = root.child("replay")) read_replay(*r, t.replay, c.epsilon_m_explicit);
    if (const json* p = root.child("pipeline")) read_pipeline(*p, t.pipeline);
    if (const json* tr = root.child("train")) {
      Section ts(*tr, "train");
      ts.get("episodes", t.episodes);
      ts.get("warmup_steps", t.warmup_steps);
      ts.get("updates_per_step", t.updates_per_step);
      ts.get("divergence_bound", t.divergence_bound);
      ts.get("analysis_window", t.analysis_window);
      ts.finish();
    }
    if (const json* m = root.child("modes")) {
      c.modes.clear();
      for (const auto& name : m->get<std::vector<std::string>>()) c.modes.push_back(replay::parse_replay_mode(name));
    }
    root.get("seeds", c.seeds);
    root.finish();
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, e.what());
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  const rl::TrainConfig& t = c.train;
  const rl::PlantedFactorConfig& p = t.env.planted;
  const rl::LaneWorldConfig& l = t.env.lane;
  const rl::AgentConfig& a = t.agent;
  const replay::ReplayConfig& r = t.replay;
  const pipeline::PipelineConfig& pl = t.pipeline;
  json modes = json::array();
  for (replay::ReplayMode m : c.modes) modes.push_back(std::string(replay::to_string(m)));
  json radius = pl.cluster.dtw.radius ? json(*pl.cluster.dtw.radius) : json(nullptr);
  return {
      {"env",
       {{"kind", t.env.kind},
        {"planted",
         {{"action_dim", p.action_dim},
          {"episode_length", p.episode_length},
          {"delay", p.delay},
          {"pulse", p.pulse},
          {"noise_sigma", p.noise_sigma},
          {"effort_cost", p.effort_cost},
          {"armed_probability", p.armed_probability},
          {"unarmed_pulse", p.unarmed_pulse},
          {"gamma", p.gamma},
          {"motif", to_rows(p.motif)},
          {"tolerance", to_vec(p.tolerance)}}},
        {"laneworld",
         {{"a", l.a},
          {"b", l.b},
          {"v_min", l.v_min},
          {"v_max", l.v_max},
          {"initial_speed", l.initial_speed},
          {"lanes", l.lanes},
          {"obstacles", l.obstacles},
          {"max_steps", l.max_steps},
          {"accel", l.accel},
          {"steer_rate", l.steer_rate},
          {"distance_scale", l.distance_scale},
          {"obstacle_speed", l.obstacle_speed},
          {"view", l.view},
          {"gamma", l.gamma}}}}},
      {"agent",
       {{"algorithm", std::string(rl::to_string(a.algorithm))},
        {"actor_hidden", a.actor_hidden},
        {"critic_hidden", a.critic_hidden},
        {"actor_lr", a.actor_lr},
        {"critic_lr", a.critic_lr},
        {"tau", a.tau},
        {"exploration_sigma", a.exploration_sigma},
        {"policy_delay", a.policy_delay},
        {"target_sigma", a.target_sigma},
        {"target_clip", a.target_clip}}},
      {"replay",
       {{"capacity", r.capacity},
        {"temp_capacity", r.temp_capacity},
        {"batch", r.batch},
        {"lambda_u", r.lambda_u},
        {"per_alpha", r.per_alpha},
        {"per_beta0", r.per_beta0},
        {"per_epsilon", r.per_epsilon},
        {"td_coeff", r.td_coeff},
        {"causal_coeff", r.causal_coeff},
        {"epsilon_m", r.curriculum.epsilon_m},
        {"eta", r.curriculum.eta}}},
      {"pipeline",
       {{"ticc",
         {{"K", pl.ticc.K},
          {"w", pl.ticc.w},
          {"beta", pl.ticc.beta},
          {"lambda", pl.ticc.lambda},
          {"max_em_iters", pl.ticc.max_em_iters},
          {"admm_iters", pl.ticc.admm_iters},
          {"tol", pl.ticc.tol}}},
        {"adaptive_k",
         {{"enabled", pl.adaptive},
          {"target_length", pl.adaptive_k.target_length},
          {"k_min", pl.adaptive_k.k_min},
          {"k_max", pl.adaptive_k.k_max}}},
        {"min_segment_length", pl.min_segment_length},
        {"kmedoids_iters", pl.cluster.max_iters},
        {"dtw_radius", radius},
        {"alpha", pl.gfci.alpha},
        {"restarts", pl.gfci.restarts},
        {"max_sepset", pl.gfci.max_sepset},
        {"min_episodes", pl.min_episodes},
        {"aggregation", pl.aggregation == causal::PathAggregation::Sum ? "sum" : "product"}}},
      {"train",
       {{"episodes", t.episodes},
        {"warmup_steps", t.warmup_steps},
        {"updates_per_step", t.updates_per_step},
        {"divergence_bound", t.divergence_bound},
        {"analysis_window", t.analysis_window}}},
      {"modes", modes},
      {"seeds", c.seeds}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(Errc::ParseError, path.string() + ": " + e.what());
  }
}

void finalize(ExperimentConfig& c) {
  if (!c.epsilon_m_explicit) c.train.replay.curriculum.epsilon_m = c.train.episodes;
  if (c.modes.empty()) fail(Errc::ConfigError, "at least one replay mode is required");
  if (c.seeds.empty()) fail(Errc::ConfigError, "at least one seed is required");
  for (replay::ReplayMode m : c.modes) {
    rl::TrainConfig probe = c.train;
    probe.replay.mode = m;
    probe.validate();
  }
  // Constructing the environment validates its parameters.
  (void)rl::make_environment(c.train.env.kind, c.train.env.lane, c.train.env.planted);
}

}  // namespace cier::app
