#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "multishape/evolution.hpp"
#include "multishape/importance.hpp"
#include "multishape/synthgen.hpp"

namespace multishape::cli {

/// Bad configuration: unknown key, unparsable value or violated invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint64_t seed = 7;
  int ray_count = kDefaultRayCount;
  double variance_threshold = kDefaultVarianceThreshold;
  int count = 100;
  int jobs = 1;
  bool learn_importance = false;
  int fold = 0;
  int folds = 1;
  bool invert = false;

  GeneratorConfig generator;
  EvolutionConfig evolution;
  LearningConfig learning;

  /// Sets one key from its textual value. Throws ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Copies the shared settings into the nested module configs and runs
  /// every module's validation. Throws ConfigError.
  void finalize();

  /// Flat document of every key with its current value.
  nlohmann::json to_json() const;
};

struct KeyInfo {
  std::string name;
  bool boolean = false;
};

/// Every accepted configuration key, in a fixed order.
const std::vector<KeyInfo>& config_keys();

/// Applies a config file: a flat JSON object, or `key = value` lines with `#`
/// comments. Throws ConfigError, or Error(kIoError) when unreadable.
void load_config_file(RunConfig& config, const std::filesystem::path& path);
void load_config_text(RunConfig& config, std::string_view text);

}  // namespace multishape::cli
