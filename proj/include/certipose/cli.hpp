#pragma once

// Command-line front end. run_cli is the whole program minus process exit so
// tests can drive it in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "certipose/partition.hpp"

namespace certipose {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitStore = 3,
  kExitSoundness = 4,
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Everything a run needs. Missing keys keep the desk-scale defaults.
struct ExperimentConfig {
  std::string target = "stripes";  // built-in name or JSON path
  CameraParams camera{125.0, 100, 100};
  PoseSpace space = desk_pose_space();
  PartitionConfig partition = desk_partition_config();
  std::size_t noise = 0;
  bool protectEdges = true;
  bool denoise = false;
  std::size_t samples = 50;
  std::uint64_t seed = 1;
  std::size_t volumeSamples = 20000;
  std::string store;  // empty: --store or CERTIPOSE_STORE

  static PoseSpace desk_pose_space();
  static PartitionConfig desk_partition_config();

  /// Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError on unknown keys or bad values.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace certipose
