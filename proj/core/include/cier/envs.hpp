#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cier::rl {

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;
  int max_steps = 0;
  double gamma = 0.99;

  /// Throws ConfigError.
  void validate() const;
};

struct StepResult {
  Eigen::VectorXd next_state;
  double reward = 0.0;
  bool done = false;
};

/// Episodic environment. The base class clamps actions into the bounds (with
/// a warning), rejects steps after the episode ended and keeps the running
/// return as the plain sum of emitted rewards.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const noexcept = 0;
  const EnvSpec& spec() const noexcept { return spec_; }

  Eigen::VectorXd reset(std::uint64_t seed);
  /// Throws EpisodeFinished after done, ShapeError on a wrong action size.
  StepResult step(const Eigen::VectorXd& action);

  bool finished() const noexcept { return done_; }
  int steps_taken() const noexcept { return steps_; }
  double episode_return() const noexcept { return return_; }

 protected:
  explicit Environment(EnvSpec spec);
  virtual Eigen::VectorXd do_reset(std::mt19937_64& rng) = 0;
  virtual StepResult do_step(const Eigen::VectorXd& action, std::mt19937_64& rng) = 0;

 private:
  EnvSpec spec_;
  std::mt19937_64 rng_;
  int steps_ = 0;
  double return_ = 0.0;
  bool done_ = true;
};

// ---------------------------------------------------------------------------

struct Obstacle {
  double x = 0.0;      // longitudinal position
  double lane = 0.0;   // lateral position in lane units
  double speed = 0.0;  // constant longitudinal speed
};

/// Straight multi-lane road with constant-velocity traffic. Actions are
/// (throttle, steer) in [-1, 1]^2. The state is the ego lateral position and
/// normalized speed followed by the relative position of every obstacle.
struct LaneWorldConfig {
  double a = 0.5;  // speed reward coefficient
  double b = 1.0;  // collision penalty coefficient
  double v_min = 0.0;
  double v_max = 1.0;
  double initial_speed = 0.5;
  int lanes = 3;
  int obstacles = 5;
  int max_steps = 100;
  double accel = 0.1;        // speed change per unit throttle
  double steer_rate = 0.25;  // lanes per unit steer
  double distance_scale = 2.0;
  double obstacle_speed = 0.8;
  double view = 30.0;
  double gamma = 0.99;
  /// Fixed traffic; when empty, `obstacles` cars are placed from the seed.
  std::vector<Obstacle> scripted;
};

class LaneWorldEnv final : public Environment {
 public:
  explicit LaneWorldEnv(LaneWorldConfig config = {});
  std::string_view name() const noexcept override { return "laneworld"; }

  const LaneWorldConfig& config() const noexcept { return config_; }
  double speed() const noexcept { return v_; }
  double lateral() const noexcept { return y_; }
  bool collided() const noexcept { return collided_; }

 private:
  Eigen::VectorXd do_reset(std::mt19937_64& rng) override;
  StepResult do_step(const Eigen::VectorXd& action, std::mt19937_64& rng) override;
  Eigen::VectorXd observe() const;

  LaneWorldConfig config_;
  double x_ = 0.0;
  double y_ = 0.0;
  double v_ = 0.0;
  bool collided_ = false;
  std::vector<Obstacle> traffic_;
};

// ---------------------------------------------------------------------------

/// Where the hidden motif was completed in one episode.
struct MotifEvent {
  std::int64_t start = 0;       // first step of the matching action window
  std::int64_t end = 0;         // last step of the window
  std::int64_t pulse_step = 0;  // step whose reward carries the pulse
  bool paid = false;            // false when unarmed or the episode ended first
};

/// Fixed-length episodes whose only sizeable reward is a pulse emitted
/// `delay` steps after the recent action window matches a hidden template
/// within a per-dimension tolerance. Every other step pays Gaussian noise
/// minus a small quadratic effort cost. The pulse is paid at most once, and
/// only in armed episodes; whether an episode is armed is drawn at reset and
/// visible in the state, so a good policy performs the motif selectively.
///
/// State: time fraction, motif prefix progress, pulse countdown, earned flag,
/// armed flag, previous action.
struct PlantedFactorConfig {
  int action_dim = 1;
  int episode_length = 50;
  /// motif_length x action_dim template; default holds dimension 0 at 0.6.
  Eigen::MatrixXd motif;
  /// Per-dimension tolerance; default 0.4 on dimension 0 and 1.0 elsewhere.
  Eigen::VectorXd tolerance;
  int delay = 10;
  double pulse = 1.0;
  double noise_sigma = 0.01;
  double effort_cost = 0.02;
  /// Chance that an episode pays the pulse at all (1 arms every episode).
  double armed_probability = 0.5;
  /// Paid instead of `pulse` when the motif completes in an unarmed episode.
  double unarmed_pulse = -0.5;
  double gamma = 0.99;

  static PlantedFactorConfig defaults();
};

class PlantedFactorEnv final : public Environment {
 public:
  explicit PlantedFactorEnv(PlantedFactorConfig config = PlantedFactorConfig::defaults());
  std::string_view name() const noexcept override { return "planted"; }

  const PlantedFactorConfig& config() const noexcept { return config_; }
  /// Ground truth for the current episode: the completion that earned (or
  /// would have earned) the pulse, if any.
  const std::vector<MotifEvent>& motif_events() const noexcept { return events_; }
  int progress() const noexcept { return progress_; }
  bool armed() const noexcept { return armed_; }

  /// True when `window` (motif_length x d) matches the template.
  bool matches(const Eigen::MatrixXd& window) const;

 private:
  Eigen::VectorXd do_reset(std::mt19937_64& rng) override;
  StepResult do_step(const Eigen::VectorXd& action, std::mt19937_64& rng) override;
  Eigen::VectorXd observe() const;
  int prefix_progress() const;

  PlantedFactorConfig config_;
  int t_ = 0;
  int progress_ = 0;
  std::int64_t pulse_at_ = -1;
  bool earned_ = false;
  bool armed_ = true;
  std::vector<Eigen::VectorXd> history_;
  std::vector<MotifEvent> events_;
};

std::unique_ptr<Environment> make_environment(std::string_view kind, const LaneWorldConfig& lane,
                                              const PlantedFactorConfig& planted);

}  // namespace cier::rl
