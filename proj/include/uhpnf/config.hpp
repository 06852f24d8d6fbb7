#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uhpnf/agent.hpp"
#include "uhpnf/environment.hpp"
#include "uhpnf/federation.hpp"

namespace uhpnf {

/// Every tunable of a run. Text form is `key = value` per line, `#` starts a comment;
/// keys are namespaced channel.*, topology.*, scenario.*, train.*, federation.*.
struct RunConfig {
  Scenario scenario;
  TrainConfig train;
  SinkConfig federation;

  /// Applies one assignment; unknown keys and malformed values throw ConfigError(line).
  void set(const std::string& key, const std::string& value, int line = 0);
  void validate() const;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  static std::vector<std::string> keys();
};

}  // namespace uhpnf
