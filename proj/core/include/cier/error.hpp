#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cier {

enum class Errc {
  // series
  EmptyEpisode,
  MixedEpisodes,
  DimensionMismatch,
  TooShort,
  WindowTooLarge,
  NonContiguousSteps,
  // ticc
  NotEnoughData,
  NotPositiveDefinite,
  InvalidParams,
  // tscf
  ReduceKPrime,
  InternalInconsistency,
  // causal
  NotADag,
  GraphCycle,
  NoOverlap,
  // replay
  ConfigError,
  NotEnoughExperience,
  // rl
  EpisodeFinished,
  ShapeError,
  Diverged,
  // cli / metrics
  EmptyScores,
  SeedMismatch,
  ParseError,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& detail);

// Non-fatal conditions (clamped inputs, low-power tests, solver stalls) are
// routed through a process-wide sink. The default sink writes to stderr.
using WarningSink = std::function<void(std::string_view)>;

WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

// RAII helper that silences or captures warnings for a scope.
class ScopedWarningSink {
 public:
  explicit ScopedWarningSink(WarningSink sink) : previous_(set_warning_sink(std::move(sink))) {}
  ~ScopedWarningSink() { set_warning_sink(std::move(previous_)); }
  ScopedWarningSink(const ScopedWarningSink&) = delete;
  ScopedWarningSink& operator=(const ScopedWarningSink&) = delete;

 private:
  WarningSink previous_;
};

}  // namespace cier
