#ifndef ADINAV_SCENARIO_HPP
#define ADINAV_SCENARIO_HPP

// Synthetic ground truth: a true trajectory, the IMU stream that reproduces
// it under the discrete mechanization, noisy aiding fixes, and LiDAR scans
// ray-cast against a ground plane and boxes.
//
// The scene lives in the local tangent NED frame anchored at the start
// position (x north, y east, z down).

#include "adinav/geometry.hpp"
#include "adinav/ins.hpp"
#include "adinav/kalman.hpp"
#include "adinav/key_value.hpp"
#include "adinav/pose.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace adinav::sim {

enum class TrajectoryKind { stationary, constant_velocity, circular, waypoints };

/// Speed and heading keyframe; both are interpolated linearly in time.
struct VelocityKeyframe {
  double time = 0.0;     // [s]
  double speed = 0.0;    // [m/s]
  double heading = 0.0;  // [rad], clockwise from north
};

/// Box with a vertical yaw axis. A non-zero velocity makes it dynamic:
/// center(t) = center + velocity * t.
struct Box {
  Vec3 center = Vec3::Zero();        // [m], local NED
  Vec3 half_extents = Vec3::Ones();  // [m]
  double yaw = 0.0;                  // [rad]
  Vec3 velocity = Vec3::Zero();      // [m/s]

  bool moving() const { return !velocity.isZero(0.0); }
  Vec3 center_at(double t) const { return center + velocity * t; }
};

struct LidarModel {
  int beams = 64;
  int azimuth_steps = 1875;
  double min_elevation = -24.8 * 0.017453292519943295;  // [rad]
  double max_elevation = 2.0 * 0.017453292519943295;    // [rad]
  double min_range = 1.0;                                // [m]
  double max_range = 80.0;                               // [m]
};

struct Scene {
  double ground_z = 0.93;  // ground plane z = ground_z (local NED, down) [m]
  std::vector<Box> boxes;
};

/// KITTI-like camera / LiDAR / IMU rig; the principal point sits at the
/// image center column and 46% of the height.
CalibrationSet default_calibration(std::size_t rows = 375, std::size_t cols = 1242, double focal = 721.5377);

struct ScenarioSpec {
  TrajectoryKind trajectory = TrajectoryKind::stationary;
  double duration = 10.0;     // [s]
  double imu_rate = 100.0;    // [Hz]
  double aiding_rate = 1.0;   // [Hz]; 0 disables aiding
  double lidar_rate = 0.0;    // [Hz]; 0 disables scans
  std::uint64_t seed = 1;

  geodesy::GeodeticPosition start{0.8552113334772214, 0.14660765716752369, 115.0};  // 49.0 N, 8.4 E
  double roll = 0.0, pitch = 0.0, heading = 0.0;  // [rad] initial attitude
  double speed = 10.0;                            // [m/s]
  double turn_radius = 50.0;                      // [m], positive turns right
  std::vector<VelocityKeyframe> keyframes;

  Vec3 accel_bias = Vec3::Zero();   // [m/s^2]
  Vec3 gyro_bias = Vec3::Zero();    // [rad/s]
  double accel_noise = 0.0;         // [m/s^2/sqrt(Hz)]
  double gyro_noise = 0.0;          // [rad/s/sqrt(Hz)]
  double aiding_pos_sigma = 0.0;    // [m]
  double aiding_vel_sigma = 0.0;    // [m/s]
  double max_specific_force = 100.0;  // [m/s^2] feasibility bound

  LidarModel lidar;
  Scene scene;
  CalibrationSet calibration = default_calibration();
  ins::MechanizationOptions mechanization;

  /// Throws InvalidArgument.
  void validate() const;
  /// Keys are listed in docs/formats.md. Throws InvalidArgument,
  /// MalformedNumber.
  static ScenarioSpec from_config(const KeyValueConfig& cfg);
};

struct GroundTruth {
  std::vector<ins::NavState> states;  // one per IMU epoch, [0] at t = 0
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  std::vector<std::size_t> cloud_epochs;  // state index of each scan
};

struct ScenarioData {
  std::vector<ins::ImuSample> imu;  // imu[k] takes states[k] to states[k+1]
  std::vector<kf::AidingMeasurement> aiding;
  /// Navigation solution as an aiding unit would report it at every epoch
  /// (truth plus aiding noise); `aiding` is a subsample of it.
  std::vector<ins::NavState> reported;
  std::vector<PointCloud> clouds;  // LiDAR frame, labels 0 static / 1 dynamic
  GroundTruth truth;
  CalibrationSet calibration;
  Scene scene;

  geodesy::LocalTangentFrame frame() const { return geodesy::LocalTangentFrame(truth.states.front().pos); }
  /// True body-in-local poses at the scan epochs.
  PoseTrajectory truth_poses() const;
  std::vector<double> cloud_times() const;
};

/// Throws InvalidArgument, InfeasibleTrajectory.
ScenarioData generate(const ScenarioSpec& spec);

/// True navigation states only (no IMU, no scans).
std::vector<ins::NavState> true_trajectory(const ScenarioSpec& spec);

/// IMU samples reproducing `states` under the discrete mechanization.
/// Throws InfeasibleTrajectory.
std::vector<ins::ImuSample> inverse_mechanization(std::span<const ins::NavState> states,
                                                  const ins::MechanizationOptions& opt,
                                                  double max_specific_force = 100.0);

struct Hit {
  double range = 0.0;
  Vec3 point = Vec3::Zero();
  int primitive = -1;  // 0 ground, k > 0 box k-1
  bool dynamic = false;
};

/// Nearest intersection along origin + s * direction (unit), s in (0, max_range].
std::optional<Hit> cast_ray(const Vec3& origin, const Vec3& direction, const Scene& scene, double time,
                            double max_range);

/// Scan from a LiDAR pose (LiDAR in local); points are in the LiDAR frame.
PointCloud scan_scene(const RigidTransform& lidar_in_local, const Scene& scene, const LidarModel& lidar,
                      double time);

/// Distance from a local point to the nearest primitive surface at `time`.
double surface_distance(const Vec3& p, const Scene& scene, double time);

/// Writes a KITTI raw drive: calibration, oxts/, velodyne_points/ (plus
/// per-point labels) and the true poses. Layout in docs/formats.md.
void write_sequence(const ScenarioData& data, const ScenarioSpec& spec, const std::filesystem::path& dir);

}  // namespace adinav::sim

#endif  // ADINAV_SCENARIO_HPP
