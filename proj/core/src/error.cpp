#include "cier/error.hpp"

#include <iostream>
#include <mutex>

namespace cier {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyEpisode: return "EmptyEpisode";
    case Errc::MixedEpisodes: return "MixedEpisodes";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::TooShort: return "TooShort";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::NonContiguousSteps: return "NonContiguousSteps";
    case Errc::NotEnoughData: return "NotEnoughData";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::ReduceKPrime: return "ReduceKPrime";
    case Errc::InternalInconsistency: return "InternalInconsistency";
    case Errc::NotADag: return "NotADag";
    case Errc::GraphCycle: return "GraphCycle";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::ConfigError: return "ConfigError";
    case Errc::NotEnoughExperience: return "NotEnoughExperience";
    case Errc::EpisodeFinished: return "EpisodeFinished";
    case Errc::ShapeError: return "ShapeError";
    case Errc::Diverged: return "Diverged";
    case Errc::EmptyScores: return "EmptyScores";
    case Errc::SeedMismatch: return "SeedMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink_slot() {
  static WarningSink sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return sink;
}

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  WarningSink previous = std::move(sink_slot());
  sink_slot() = std::move(sink);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink_slot()) sink_slot()(message);
}

}  // namespace cier
