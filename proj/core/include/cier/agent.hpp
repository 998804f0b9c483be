#pragma once

#include "cier/envs.hpp"
#include "cier/mlp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cier::rl {

enum class Algorithm { Ddpg, Td3 };

std::string_view to_string(Algorithm algorithm) noexcept;
Algorithm parse_algorithm(std::string_view text);

struct AgentConfig {
  Algorithm algorithm = Algorithm::Ddpg;
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double tau = 0.005;
  /// Gaussian exploration noise, as a fraction of the half action range.
  double exploration_sigma = 0.1;
  // TD3 extras
  int policy_delay = 2;
  double target_sigma = 0.2;
  double target_clip = 0.5;

  /// Throws ConfigError.
  void validate() const;
};

/// Column-major minibatch: one transition per column.
struct Minibatch {
  Eigen::MatrixXd states;       // m x B
  Eigen::MatrixXd actions;      // d x B
  Eigen::VectorXd rewards;      // B
  Eigen::MatrixXd next_states;  // m x B
  Eigen::VectorXd dones;        // B, 1 for terminal
  Eigen::VectorXd weights;      // B importance weights
};

struct UpdateStats {
  Eigen::VectorXd td_errors;  // Q1(s, a) - y before the update
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  bool actor_updated = false;
};

/// Deterministic actor-critic learner (DDPG, or TD3 with twin critics,
/// delayed policy updates and target policy smoothing).
class Agent {
 public:
  Agent(const EnvSpec& env, AgentConfig config, std::uint64_t seed);

  const AgentConfig& config() const noexcept { return config_; }
  const EnvSpec& env_spec() const noexcept { return env_; }

  Eigen::VectorXd act(const Eigen::VectorXd& state) const;
  /// act() plus clipped Gaussian noise.
  Eigen::VectorXd explore(const Eigen::VectorXd& state, std::mt19937_64& rng) const;
  /// Uniform over the action box.
  Eigen::VectorXd random_action(std::mt19937_64& rng) const;

  /// Critic input rows: state then action.
  static Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions);

  /// r + gamma (1 - done) Q'(s', a'). TD3 takes the smaller of the two
  /// target critics at a smoothed target action drawn with `rng`.
  Eigen::VectorXd td_target(const Minibatch& batch, std::mt19937_64& rng) const;

  /// One gradient step on the critic(s); the actor and targets follow every
  /// step (DDPG) or every policy_delay steps (TD3).
  UpdateStats update(const Minibatch& batch, std::mt19937_64& rng);

  Mlp& actor() noexcept { return actor_; }
  Mlp& critic1() noexcept { return critic1_; }
  Mlp& critic2() noexcept { return critic2_; }
  Mlp& target_actor() noexcept { return target_actor_; }
  Mlp& target_critic1() noexcept { return target_critic1_; }
  Mlp& target_critic2() noexcept { return target_critic2_; }
  const Mlp& actor() const noexcept { return actor_; }
  const Mlp& critic1() const noexcept { return critic1_; }

  bool finite() const;
  long long updates() const noexcept { return updates_; }

 private:
  EnvSpec env_;
  AgentConfig config_;
  Mlp actor_, critic1_, critic2_;
  Mlp target_actor_, target_critic1_, target_critic2_;
  Adam actor_opt_, critic1_opt_, critic2_opt_;
  long long updates_ = 0;
};

}  // namespace cier::rl
