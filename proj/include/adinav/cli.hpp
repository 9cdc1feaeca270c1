#ifndef ADINAV_CLI_HPP
#define ADINAV_CLI_HPP

// Subcommands of the `adinav` tool. Each command writes into a staging
// directory next to its output and renames it into place on success.

#include "adinav/adi.hpp"
#include "adinav/kalman.hpp"
#include "adinav/key_value.hpp"
#include "adinav/kitti_io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace adinav::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kSuccess = 0, kUsage = 2, kInputFormat = 3, kNumericalFailure = 4 };

int exit_code_for(ErrorCode code);

/// "error code=<name> exit=<n> msg=<quoted message>"
std::string error_line(ErrorCode code, const std::string& message);

/// Environment variable naming the filter/ADI config file when --config is absent.
inline constexpr const char* kConfigEnv = "ADINAV_CONFIG";

enum class PoseSource { kalman, oxts };

struct CommonOptions {
  std::optional<fs::path> config;  // key = value file (filter and ADI settings)
  int threads = 0;                 // 0 = all logical cores
  int verbosity = 0;
};

/// Resolved configuration: --config, else $ADINAV_CONFIG, else defaults.
KeyValueConfig load_run_config(const CommonOptions& common);
kf::FilterConfig filter_config_from(const KeyValueConfig& cfg);
adi::AdiConfig adi_config_from(const KeyValueConfig& cfg);

struct PosesOptions {
  fs::path sequence;
  fs::path out;
  kitti::ImuTriplet triplet = kitti::ImuTriplet::xyz;
  double aiding_interval = 1.0;  // [s] between OXTS records used as fixes
};

struct AdiOptions {
  fs::path sequence;
  fs::path out;
  std::optional<fs::path> poses;          // precomputed poses.txt
  std::optional<PoseSource> pose_source;  // exclusive with `poses`
  kitti::AdiExportMode mode = kitti::AdiExportMode::float32;
  std::optional<int> window_radius;
  std::optional<double> threshold;
  kitti::ImuTriplet triplet = kitti::ImuTriplet::xyz;
  double aiding_interval = 1.0;
};

struct CompareOptions {
  fs::path sequence;
  fs::path out;
  kitti::ImuTriplet triplet = kitti::ImuTriplet::xyz;
  double aiding_interval = 1.0;
};

struct MetricsOptions {
  fs::path pred;
  fs::path gt;
  fs::path out;
  std::optional<fs::path> depth_pred;
  std::optional<fs::path> depth_gt;
  std::string space = "perspective";
};

struct SimulateOptions {
  fs::path spec;
  fs::path out;
};

struct FuseOptions {
  fs::path rgb;
  fs::path lidar;
  double alpha = 1.0;
  fs::path out;
};

/// Poses at the LiDAR timestamps from the selected source.
PoseTrajectory sequence_poses(const kitti::SequenceManifest& seq, PoseSource source, const kf::FilterConfig& cfg,
                              kitti::ImuTriplet triplet, double aiding_interval,
                              kf::IntegrationResult* integration = nullptr);

/// OXTS records (index >= 1) starting a new aiding interval.
std::vector<kf::AidingMeasurement> select_aiding(const std::vector<kitti::OxtsRecord>& records, double interval);

void cmd_poses(const PosesOptions& o, const CommonOptions& common);
void cmd_adi(const AdiOptions& o, const CommonOptions& common);
void cmd_compare(const CompareOptions& o, const CommonOptions& common);
void cmd_metrics(const MetricsOptions& o, const CommonOptions& common);
void cmd_simulate(const SimulateOptions& o, const CommonOptions& common);
void cmd_fuse(const FuseOptions& o, const CommonOptions& common);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace adinav::cli

#endif  // ADINAV_CLI_HPP
