#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace cier::app {

struct RunManifest {
  nlohmann::json config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;

  /// git blob hash (SHA-1 of "blob <len>\0" + canonical compact JSON) of the
  /// config. Re-serializing the config does not change it.
  std::string input_hash() const;
  nlohmann::json to_json() const;
};

/// SHA-1 of `data` as lowercase hex.
std::string sha1_hex(const std::string& data);
std::string git_blob_hash(const std::string& content);

}  // namespace cier::app
