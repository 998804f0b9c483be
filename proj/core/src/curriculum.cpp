#include "cier/error.hpp"
#include "cier/replay.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cier::replay {

double mu(int epsilon_c, const CurriculumSchedule& schedule) {
  if (schedule.epsilon_m <= 0) fail(Errc::ConfigError, "epsilon_m must be > 0");
  if (!(schedule.eta > 0.0)) fail(Errc::ConfigError, "eta must be > 0");
  if (epsilon_c < 0 || epsilon_c > schedule.epsilon_m) {
    warn("curriculum epoch " + std::to_string(epsilon_c) + " clamped into [0, " +
         std::to_string(schedule.epsilon_m) + "]");
    epsilon_c = std::clamp(epsilon_c, 0, schedule.epsilon_m);
  }
  // Integer difference of squares keeps perfect squares exact.
  const long long m = schedule.epsilon_m;
  const long long c = epsilon_c;
  const double root = std::sqrt(static_cast<double>(m * m - c * c));
  return schedule.eta * root / static_cast<double>(m);
}

std::string_view to_string(ReplayMode mode) noexcept {
  switch (mode) {
    case ReplayMode::Uniform: return "uniform";
    case ReplayMode::Per: return "per";
    case ReplayMode::Cier: return "cier";
    case ReplayMode::Ciper: return "ciper";
  }
  return "uniform";
}

ReplayMode parse_replay_mode(std::string_view text) {
  if (text == "uniform") return ReplayMode::Uniform;
  if (text == "per") return ReplayMode::Per;
  if (text == "cier") return ReplayMode::Cier;
  if (text == "ciper") return ReplayMode::Ciper;
  fail(Errc::ConfigError, "unknown replay mode '" + std::string(text) + "'");
}

void ReplayConfig::validate() const {
  if (capacity == 0) fail(Errc::ConfigError, "capacity must be > 0");
  if (temp_capacity == 0 || temp_capacity > capacity) fail(Errc::ConfigError, "temp_capacity must be in [1, capacity]");
  if (batch == 0) fail(Errc::ConfigError, "batch must be > 0");
  if (!(lambda_u >= 0.0 && lambda_u <= 1.0)) fail(Errc::ConfigError, "lambda_u must be in [0, 1]");
  if ((mode == ReplayMode::Cier || mode == ReplayMode::Ciper) && lambda_u == 0.0) {
    fail(Errc::ConfigError, "lambda_u must be > 0 in cier/ciper so every transition stays sampleable");
  }
  if (!(per_alpha >= 0.0)) fail(Errc::ConfigError, "per_alpha must be >= 0");
  if (!(per_beta0 >= 0.0 && per_beta0 <= 1.0)) fail(Errc::ConfigError, "per_beta0 must be in [0, 1]");
  if (!(per_epsilon > 0.0)) fail(Errc::ConfigError, "per_epsilon must be > 0");
  if (!(td_coeff >= 0.0) || !(causal_coeff >= 0.0)) fail(Errc::ConfigError, "mixing coefficients must be >= 0");
  if (curriculum.epsilon_m <= 0 || !(curriculum.eta > 0.0)) fail(Errc::ConfigError, "invalid curriculum schedule");
}

}  // namespace cier::replay
