#include "cier/agent.hpp"

#include "cier/error.hpp"

#include <algorithm>
#include <string>

namespace cier::rl {

std::string_view to_string(Algorithm algorithm) noexcept {
  return algorithm == Algorithm::Td3 ? "td3" : "ddpg";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "ddpg") return Algorithm::Ddpg;
  if (text == "td3") return Algorithm::Td3;
  fail(Errc::ConfigError, "unknown algorithm '" + std::string(text) + "'");
}

void AgentConfig::validate() const {
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) fail(Errc::ConfigError, "learning rates must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) fail(Errc::ConfigError, "tau must be in (0, 1]");
  if (!(exploration_sigma >= 0.0)) fail(Errc::ConfigError, "exploration_sigma must be >= 0");
  if (policy_delay < 1) fail(Errc::ConfigError, "policy_delay must be >= 1");
  if (!(target_sigma >= 0.0) || !(target_clip >= 0.0)) fail(Errc::ConfigError, "target noise must be >= 0");
  if (actor_hidden.empty() || critic_hidden.empty()) fail(Errc::ConfigError, "networks need a hidden layer");
}

namespace {

std::vector<int> layout(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

Mlp make_actor(const EnvSpec& env, const AgentConfig& c, std::mt19937_64& rng) {
  Mlp net(layout(env.state_dim, c.actor_hidden, env.action_dim), OutputActivation::ScaledTanh, rng);
  net.set_output_range(env.action_low, env.action_high);
  return net;
}

Mlp make_critic(const EnvSpec& env, const AgentConfig& c, std::mt19937_64& rng) {
  return Mlp(layout(env.state_dim + env.action_dim, c.critic_hidden, 1), OutputActivation::Linear, rng);
}

}  // namespace

Agent::Agent(const EnvSpec& env, AgentConfig config, std::uint64_t seed) : env_(env), config_(std::move(config)) {
  env_.validate();
  config_.validate();
  std::mt19937_64 rng(seed);
  actor_ = make_actor(env_, config_, rng);
  critic1_ = make_critic(env_, config_, rng);
  critic2_ = make_critic(env_, config_, rng);
  target_actor_ = actor_;
  target_critic1_ = critic1_;
  target_critic2_ = critic2_;
  actor_opt_ = Adam(actor_, config_.actor_lr);
  critic1_opt_ = Adam(critic1_, config_.critic_lr);
  critic2_opt_ = Adam(critic2_, config_.critic_lr);
}

Eigen::VectorXd Agent::act(const Eigen::VectorXd& state) const { return actor_.forward(state).col(0); }

Eigen::VectorXd Agent::explore(const Eigen::VectorXd& state, std::mt19937_64& rng) const {
  Eigen::VectorXd a = act(state);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double half = (env_.action_high[j] - env_.action_low[j]) / 2.0;
    a[j] += config_.exploration_sigma * half * n(rng);
  }
  return a.cwiseMax(env_.action_low).cwiseMin(env_.action_high);
}

Eigen::VectorXd Agent::random_action(std::mt19937_64& rng) const {
  Eigen::VectorXd a(env_.action_dim);
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    std::uniform_real_distribution<double> u(env_.action_low[j], env_.action_high[j]);
    a[j] = u(rng);
  }
  return a;
}

Eigen::MatrixXd Agent::critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) {
  if (states.cols() != actions.cols()) fail(Errc::ShapeError, "state and action batches differ in size");
  Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

Eigen::VectorXd Agent::td_target(const Minibatch& batch, std::mt19937_64& rng) const {
  Eigen::MatrixXd next_actions = target_actor_.forward(batch.next_states);
  Eigen::VectorXd q;
  if (config_.algorithm == Algorithm::Td3) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index b = 0; b < next_actions.cols(); ++b) {
      for (Eigen::Index j = 0; j < next_actions.rows(); ++j) {
        const double half = (env_.action_high[j] - env_.action_low[j]) / 2.0;
        const double eps = std::clamp(config_.target_sigma * half * n(rng), -config_.target_clip * half,
                                      config_.target_clip * half);
        next_actions(j, b) = std::clamp(next_actions(j, b) + eps, env_.action_low[j], env_.action_high[j]);
      }
    }
    const Eigen::MatrixXd x = critic_input(batch.next_states, next_actions);
    q = target_critic1_.forward(x).row(0).transpose().cwiseMin(target_critic2_.forward(x).row(0).transpose());
  } else {
    q = target_critic1_.forward(critic_input(batch.next_states, next_actions)).row(0).transpose();
  }
  return batch.rewards.array() + env_.gamma * (1.0 - batch.dones.array()) * q.array();
}

namespace {

// Weighted mean squared error step; returns the loss and fills the TD errors.
double critic_step(Mlp& critic, Adam& opt, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& w, Eigen::VectorXd* td) {
  Mlp::Cache cache;
  const Eigen::VectorXd q = critic.forward(x, cache).row(0).transpose();
  const Eigen::VectorXd err = q - y;
  if (td) *td = err;
  const double n = static_cast<double>(err.size());
  const Eigen::VectorXd g = w.cwiseProduct(err) / n;
  opt.step(critic, critic.backward(cache, g.transpose()));
  return 0.5 * w.dot(err.cwiseProduct(err)) / n;
}

}  // namespace

UpdateStats Agent::update(const Minibatch& batch, std::mt19937_64& rng) {
  const Eigen::Index n = batch.states.cols();
  if (batch.states.rows() != env_.state_dim || batch.next_states.rows() != env_.state_dim ||
      batch.actions.rows() != env_.action_dim || batch.actions.cols() != n || batch.next_states.cols() != n ||
      batch.rewards.size() != n || batch.dones.size() != n || batch.weights.size() != n) {
    fail(Errc::ShapeError, "inconsistent minibatch");
  }
  UpdateStats stats;
  const Eigen::VectorXd y = td_target(batch, rng);
  const Eigen::MatrixXd x = critic_input(batch.states, batch.actions);
  stats.critic_loss = critic_step(critic1_, critic1_opt_, x, y, batch.weights, &stats.td_errors);
  if (config_.algorithm == Algorithm::Td3) critic_step(critic2_, critic2_opt_, x, y, batch.weights, nullptr);
  ++updates_;

  const bool policy_step = config_.algorithm == Algorithm::Ddpg || updates_ % config_.policy_delay == 0;
  if (policy_step) {
    Mlp::Cache actor_cache;
    const Eigen::MatrixXd a = actor_.forward(batch.states, actor_cache);
    Mlp::Cache critic_cache;
    const Eigen::MatrixXd q = critic1_.forward(critic_input(batch.states, a), critic_cache);
    stats.actor_loss = -q.mean();
    // d(-mean Q)/dQ = -1/B; the critic's input gradient carries it to the action.
    const Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(1, n, -1.0 / static_cast<double>(n));
    const MlpGradients cg = critic1_.backward(critic_cache, upstream);
    const Eigen::MatrixXd da = cg.input.bottomRows(env_.action_dim);
    actor_opt_.step(actor_, actor_.backward(actor_cache, da));
    stats.actor_updated = true;

    soft_update(target_actor_, actor_, config_.tau);
    soft_update(target_critic1_, critic1_, config_.tau);
    if (config_.algorithm == Algorithm::Td3) soft_update(target_critic2_, critic2_, config_.tau);
  }
  return stats;
}

bool Agent::finite() const {
  return actor_.finite() && critic1_.finite() && critic2_.finite() && target_actor_.finite() &&
         target_critic1_.finite() && target_critic2_.finite();
}

}  // namespace cier::rl
