#include "cier/envs.hpp"

#include "cier/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cier::rl {

void EnvSpec::validate() const {
  if (state_dim <= 0 || action_dim <= 0) fail(Errc::ConfigError, "state and action dimensions must be positive");
  if (action_low.size() != action_dim || action_high.size() != action_dim) {
    fail(Errc::ConfigError, "action bounds must have one entry per action dimension");
  }
  for (int j = 0; j < action_dim; ++j) {
    if (!std::isfinite(action_low[j]) || !std::isfinite(action_high[j]) || !(action_low[j] < action_high[j])) {
      fail(Errc::ConfigError, "action bounds must be finite with low < high");
    }
  }
  if (max_steps <= 0) fail(Errc::ConfigError, "max_steps must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) fail(Errc::ConfigError, "gamma must be in (0, 1)");
}

Environment::Environment(EnvSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

Eigen::VectorXd Environment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  steps_ = 0;
  return_ = 0.0;
  done_ = false;
  return do_reset(rng_);
}

StepResult Environment::step(const Eigen::VectorXd& action) {
  if (done_) fail(Errc::EpisodeFinished, std::string(name()) + " episode already ended");
  if (action.size() != spec_.action_dim) {
    fail(Errc::ShapeError, "action has " + std::to_string(action.size()) + " entries, expected " +
                               std::to_string(spec_.action_dim));
  }
  Eigen::VectorXd a = action.cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);
  if (a != action) warn("action outside bounds was clamped");
  StepResult r = do_step(a, rng_);
  ++steps_;
  if (steps_ >= spec_.max_steps) r.done = true;
  return_ += r.reward;
  done_ = r.done;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

EnvSpec lane_spec(const LaneWorldConfig& c) {
  if (!(c.v_min < c.v_max)) fail(Errc::ConfigError, "v_min must be below v_max");
  if (c.lanes < 1) fail(Errc::ConfigError, "at least one lane is required");
  if (c.obstacles < 0) fail(Errc::ConfigError, "obstacle count must be >= 0");
  const int cars = c.scripted.empty() ? c.obstacles : static_cast<int>(c.scripted.size());
  EnvSpec s;
  s.state_dim = 2 + 2 * cars;
  s.action_dim = 2;
  s.action_low = Eigen::VectorXd::Constant(2, -1.0);
  s.action_high = Eigen::VectorXd::Constant(2, 1.0);
  s.max_steps = c.max_steps;
  s.gamma = c.gamma;
  return s;
}

}  // namespace

LaneWorldEnv::LaneWorldEnv(LaneWorldConfig config) : Environment(lane_spec(config)), config_(std::move(config)) {}

Eigen::VectorXd LaneWorldEnv::do_reset(std::mt19937_64& rng) {
  x_ = 0.0;
  y_ = std::floor((config_.lanes - 1) / 2.0);
  v_ = std::clamp(config_.initial_speed, config_.v_min, config_.v_max);
  collided_ = false;
  if (!config_.scripted.empty()) {
    traffic_ = config_.scripted;
  } else {
    traffic_.clear();
    std::uniform_int_distribution<int> lane(0, config_.lanes - 1);
    std::uniform_real_distribution<double> gap(6.0, 14.0);
    double x = 8.0;
    for (int k = 0; k < config_.obstacles; ++k) {
      x += gap(rng);
      traffic_.push_back({x, static_cast<double>(lane(rng)), config_.obstacle_speed});
    }
  }
  return observe();
}

StepResult LaneWorldEnv::do_step(const Eigen::VectorXd& action, std::mt19937_64&) {
  v_ = std::clamp(v_ + config_.accel * action[0], config_.v_min, config_.v_max);
  y_ = std::clamp(y_ + config_.steer_rate * action[1], 0.0, static_cast<double>(config_.lanes - 1));
  x_ += config_.distance_scale * v_;
  for (Obstacle& o : traffic_) o.x += o.speed;
  for (const Obstacle& o : traffic_) {
    if (std::abs(o.x - x_) < 1.0 && std::abs(o.lane - y_) < 0.5) collided_ = true;
  }
  StepResult r;
  r.reward = config_.a * (v_ - config_.v_min) / (config_.v_max - config_.v_min) - config_.b * (collided_ ? 1.0 : 0.0);
  r.done = collided_;
  r.next_state = observe();
  return r;
}

Eigen::VectorXd LaneWorldEnv::observe() const {
  Eigen::VectorXd s(spec().state_dim);
  const double lane_span = std::max(1, config_.lanes - 1);
  s[0] = y_ / lane_span;
  s[1] = (v_ - config_.v_min) / (config_.v_max - config_.v_min);
  for (std::size_t k = 0; k < traffic_.size(); ++k) {
    const Obstacle& o = traffic_[k];
    s[2 + 2 * static_cast<Eigen::Index>(k)] = std::clamp((o.x - x_) / config_.view, -1.0, 1.0);
    s[3 + 2 * static_cast<Eigen::Index>(k)] = (o.lane - y_) / lane_span;
  }
  return s;
}

// ---------------------------------------------------------------------------

PlantedFactorConfig PlantedFactorConfig::defaults() {
  PlantedFactorConfig c;
  c.motif = Eigen::MatrixXd::Zero(5, c.action_dim);
  c.motif.col(0).setConstant(0.6);
  c.tolerance = Eigen::VectorXd::Constant(c.action_dim, 1.0);
  c.tolerance[0] = 0.4;
  return c;
}

namespace {

EnvSpec planted_spec(const PlantedFactorConfig& c) {
  if (c.action_dim < 1) fail(Errc::ConfigError, "action_dim must be positive");
  if (c.motif.rows() < 1 || c.motif.cols() != c.action_dim) {
    fail(Errc::ConfigError, "motif must be a nonempty (length x action_dim) matrix");
  }
  if (c.tolerance.size() != c.action_dim || (c.tolerance.array() < 0.0).any()) {
    fail(Errc::ConfigError, "tolerance needs one non-negative entry per action dimension");
  }
  if (c.delay < 0) fail(Errc::ConfigError, "delay must be >= 0");
  if (c.episode_length < c.motif.rows()) fail(Errc::ConfigError, "episodes shorter than the motif");
  if (!(c.noise_sigma >= 0.0) || !(c.effort_cost >= 0.0)) fail(Errc::ConfigError, "noise and effort must be >= 0");
  if (!(c.armed_probability > 0.0 && c.armed_probability <= 1.0)) {
    fail(Errc::ConfigError, "armed_probability must be in (0, 1]");
  }
  EnvSpec s;
  s.state_dim = 5 + c.action_dim;
  s.action_dim = c.action_dim;
  s.action_low = Eigen::VectorXd::Constant(c.action_dim, -1.0);
  s.action_high = Eigen::VectorXd::Constant(c.action_dim, 1.0);
  s.max_steps = c.episode_length;
  s.gamma = c.gamma;
  return s;
}

}  // namespace

PlantedFactorEnv::PlantedFactorEnv(PlantedFactorConfig config)
    : Environment(planted_spec(config)), config_(std::move(config)) {}

bool PlantedFactorEnv::matches(const Eigen::MatrixXd& window) const {
  if (window.rows() != config_.motif.rows() || window.cols() != config_.motif.cols()) return false;
  for (Eigen::Index i = 0; i < window.rows(); ++i) {
    if (((window.row(i) - config_.motif.row(i)).cwiseAbs().transpose().array() > config_.tolerance.array()).any()) {
      return false;
    }
  }
  return true;
}

int PlantedFactorEnv::prefix_progress() const {
  // Longest k < motif length such that the last k actions match the first k
  // template rows.
  const int len = static_cast<int>(config_.motif.rows());
  const int have = static_cast<int>(history_.size());
  for (int k = std::min(len - 1, have); k > 0; --k) {
    bool ok = true;
    for (int j = 0; j < k && ok; ++j) {
      const Eigen::VectorXd& a = history_[static_cast<std::size_t>(have - k + j)];
      ok = !((a - config_.motif.row(j).transpose()).cwiseAbs().array() > config_.tolerance.array()).any();
    }
    if (ok) return k;
  }
  return 0;
}

Eigen::VectorXd PlantedFactorEnv::do_reset(std::mt19937_64& rng) {
  armed_ = config_.armed_probability >= 1.0 || std::bernoulli_distribution(config_.armed_probability)(rng);
  t_ = 0;
  progress_ = 0;
  pulse_at_ = -1;
  earned_ = false;
  history_.clear();
  events_.clear();
  return observe();
}

StepResult PlantedFactorEnv::do_step(const Eigen::VectorXd& action, std::mt19937_64& rng) {
  history_.push_back(action);
  const int len = static_cast<int>(config_.motif.rows());
  if (!earned_ && static_cast<int>(history_.size()) >= len) {
    Eigen::MatrixXd window(len, config_.action_dim);
    for (int j = 0; j < len; ++j) window.row(j) = history_[history_.size() - static_cast<std::size_t>(len - j)].transpose();
    if (matches(window)) {
      earned_ = true;
      pulse_at_ = t_ + config_.delay;
      events_.push_back({t_ - len + 1, t_, pulse_at_, false});
    }
  }
  StepResult r;
  std::normal_distribution<double> noise(0.0, config_.noise_sigma);
  r.reward = (config_.noise_sigma > 0.0 ? noise(rng) : 0.0) - config_.effort_cost * action.squaredNorm();
  if (t_ == pulse_at_) {
    r.reward += armed_ ? config_.pulse : config_.unarmed_pulse;
    events_.back().paid = armed_;
  }
  ++t_;
  progress_ = prefix_progress();
  r.done = t_ >= config_.episode_length;
  r.next_state = observe();
  return r;
}

Eigen::VectorXd PlantedFactorEnv::observe() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(spec().state_dim);
  s[0] = static_cast<double>(t_) / config_.episode_length;
  s[1] = static_cast<double>(progress_) / static_cast<double>(config_.motif.rows());
  if (pulse_at_ >= t_ && config_.delay > 0) s[2] = static_cast<double>(pulse_at_ - t_) / config_.delay;
  s[3] = earned_ ? 1.0 : 0.0;
  s[4] = armed_ ? 1.0 : 0.0;
  if (!history_.empty()) s.tail(config_.action_dim) = history_.back();
  return s;
}

std::unique_ptr<Environment> make_environment(std::string_view kind, const LaneWorldConfig& lane,
                                              const PlantedFactorConfig& planted) {
  if (kind == "laneworld") return std::make_unique<LaneWorldEnv>(lane);
  if (kind == "planted") return std::make_unique<PlantedFactorEnv>(planted);
  fail(Errc::ConfigError, "unknown environment '" + std::string(kind) + "'");
}

}  // namespace cier::rl
