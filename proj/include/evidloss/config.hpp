#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "evidloss/net.hpp"
#include "evidloss/synth.hpp"

namespace evidloss {

inline constexpr const char* kConfigVersion = "evidloss-config-v1";

/// Raised for malformed configs; what() starts with the dotted key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& why)
      : std::runtime_error(key + ": " + why), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// The loss hyperparameters live in train.loss and serialize under "loss".
/// The root seed is copied into data.seed and train.seed; the generator and
/// trainer derive independent streams from it by label.
struct RunConfig {
  SyntheticDatasetSpec data;
  TrainConfig train;
  std::filesystem::path output_dir = "runs/default";
  std::uint64_t seed = 7;

  /// Shipped defaults: default dataset, ufce_eus_er, lambda 0.1, lr 3e-3,
  /// 200 epochs. Matches configs/default.json.
  static RunConfig defaults(std::uint64_t seed = 7);
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace evidloss
