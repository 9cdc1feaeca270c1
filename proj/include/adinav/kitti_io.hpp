#ifndef ADINAV_KITTI_IO_HPP
#define ADINAV_KITTI_IO_HPP

// KITTI raw-format readers and the artifact writers. Layouts are specified in
// docs/formats.md.

#include "adinav/adi.hpp"
#include "adinav/geometry.hpp"
#include "adinav/ins.hpp"
#include "adinav/kalman.hpp"
#include "adinav/pose.hpp"
#include "adinav/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adinav::kitti {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- velodyne

/// 4 x float32 LE per point (x, y, z, reflectance). Throws MalformedFile,
/// MissingFile, IoError.
PointCloud read_velodyne(const fs::path& path);
PointCloud decode_velodyne(const std::vector<std::uint8_t>& bytes, std::string_view origin = "<velodyne>");
std::vector<std::uint8_t> encode_velodyne(const PointCloud& cloud);
void write_velodyne(const fs::path& path, const PointCloud& cloud);

// ---------------------------------------------------------------- timestamps

/// "YYYY-MM-DD HH:MM:SS.fffffffff" split into whole seconds since the Unix
/// epoch and nanoseconds.
struct Timestamp {
  std::int64_t seconds = 0;
  std::int64_t nanos = 0;

  /// Seconds relative to `epoch` whole seconds.
  double relative_to(std::int64_t epoch) const {
    return static_cast<double>(seconds - epoch) + static_cast<double>(nanos) * 1e-9;
  }
  auto operator<=>(const Timestamp&) const = default;
};

/// Throws MalformedNumber.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& t);
/// Inverse of relative_to, rounded to the nanosecond.
Timestamp timestamp_from_relative(double seconds, std::int64_t epoch);

/// One timestamp per non-empty line. Throws MissingFile, MalformedNumber.
std::vector<Timestamp> read_timestamps(const fs::path& path);
void write_timestamps(const fs::path& path, const std::vector<Timestamp>& stamps);

// ---------------------------------------------------------------- oxts

inline constexpr std::size_t kOxtsFieldCount = 30;

/// One OXTS RT3003 packet as stored by KITTI. Angles in radians (lat/lon are
/// converted from degrees at parse time). Axis triplets keep the file's
/// conventions: x/f forward, y/l left, z/u up.
struct OxtsRecord {
  double lat = 0.0, lon = 0.0, alt = 0.0;  // [rad], [rad], [m]
  double roll = 0.0, pitch = 0.0, yaw = 0.0;  // yaw 0 = east, counter-clockwise
  double vn = 0.0, ve = 0.0;                  // [m/s]
  double vf = 0.0, vl = 0.0, vu = 0.0;        // [m/s]
  double ax = 0.0, ay = 0.0, az = 0.0;        // [m/s^2]
  double af = 0.0, al = 0.0, au = 0.0;        // [m/s^2]
  double wx = 0.0, wy = 0.0, wz = 0.0;        // [rad/s]
  double wf = 0.0, wl = 0.0, wu = 0.0;        // [rad/s]
  double pos_accuracy = 0.0, vel_accuracy = 0.0;
  int navstat = 0, numsats = 0, posmode = 0, velmode = 0, orimode = 0;
  double timestamp = 0.0;  // [s], relative to the sequence epoch

  bool operator==(const OxtsRecord&) const = default;
};

/// Which accelerometer / gyro triplet feeds the mechanization.
enum class ImuTriplet { xyz, flu };

/// Throws MissingField (wrong field count), MalformedNumber, InvalidArgument
/// (lat/lon out of range).
OxtsRecord parse_oxts_line(std::string_view line, std::string_view origin = "<oxts>");
/// 30 space-separated fields, round-trip exact.
std::string format_oxts_line(const OxtsRecord& r);

/// `<dir>/data/*.txt` in name order, timestamps from `<dir>/timestamps.txt`
/// relative to `epoch` (or the first stamp's whole second when absent).
/// Throws MissingFile, MissingField, MalformedNumber.
std::vector<OxtsRecord> read_oxts(const fs::path& dir, std::optional<std::int64_t> epoch = std::nullopt);
void write_oxts(const fs::path& dir, const std::vector<OxtsRecord>& records, std::int64_t epoch);

/// Body (forward-right-down) to NED attitude of a record.
Mat3 oxts_attitude(const OxtsRecord& r);
geodesy::GeodeticPosition oxts_position(const OxtsRecord& r);
/// NED velocity: north/east from the record, down from the body-frame
/// velocity rotated into the level frame.
Vec3 oxts_velocity(const OxtsRecord& r);
ins::NavState oxts_nav_state(const OxtsRecord& r);
/// IMU sample in forward-right-down axes from the selected triplet.
ins::ImuSample oxts_imu(const OxtsRecord& r, ImuTriplet triplet = ImuTriplet::xyz);
kf::AidingMeasurement oxts_aiding(const OxtsRecord& r);
/// Fills the record's navigation fields from a state (inverse of
/// oxts_attitude / oxts_position / oxts_velocity).
void set_oxts_navigation(OxtsRecord& r, const ins::NavState& nav);
void set_oxts_imu(OxtsRecord& r, const ins::ImuSample& imu);

// ---------------------------------------------------------------- calibration

/// "key: v1 v2 ..." lines. Non-numeric values (calib_time) are kept as text.
struct CalibFile {
  std::vector<std::pair<std::string, std::string>> entries;

  /// Throws MissingField, MalformedNumber.
  std::vector<double> numbers(const std::string& key, std::size_t expected) const;
  bool has(const std::string& key) const;
};

CalibFile parse_calib_file(std::string_view text, std::string_view origin = "<calib>");

inline constexpr int kReferenceCamera = 2;  // left color camera

/// Reads calib_velo_to_cam.txt, calib_cam_to_cam.txt and calib_imu_to_velo.txt
/// from `dir`. Throws MissingFile, MissingField, MalformedNumber.
CalibrationSet read_calibration(const fs::path& dir, int camera = kReferenceCamera);
/// Writes the three files with `calib` as camera `camera`.
void write_calibration(const fs::path& dir, const CalibrationSet& calib, int camera = kReferenceCamera);

// ---------------------------------------------------------------- sequence

struct FrameEntry {
  std::size_t index = 0;
  fs::path image;  // may not exist (optional for the LiDAR pipeline)
  fs::path cloud;
  double image_time = 0.0;
  double cloud_time = 0.0;
};

struct SequenceManifest {
  fs::path root;
  fs::path calib_dir;
  std::int64_t epoch = 0;  // whole seconds subtracted from every timestamp
  std::vector<FrameEntry> frames;
  std::vector<OxtsRecord> oxts;

  /// Scans a KITTI raw drive directory (velodyne_points/, oxts/, optional
  /// image_02/). Calibration files are looked up in the drive directory, then
  /// its parent. Throws MissingFile, NonMonotonicTime.
  static SequenceManifest scan(const fs::path& root);
};

// ---------------------------------------------------------------- products

enum class AdiExportMode { float32, png8 };

struct ChannelRange {
  double min = 0.0;
  double max = 0.0;
  bool degenerate = true;  // no valid pixel or max == min
};

/// Tensor [3, H, W]; NoData pixels are NaN.
Tensor adi_to_tensor(const adi::ThreeChannelAdi& adi);
adi::ThreeChannelAdi tensor_to_adi(const Tensor& t, double timestamp = 0.0);

/// float32: binary tensor at `path`. png8: RGB PNG at `path` plus a sidecar
/// `<path>.range` with the per-channel normalization. Returns the ranges
/// (png8) or an empty array (float32).
std::array<ChannelRange, 3> write_adi(const adi::ThreeChannelAdi& adi, const fs::path& path, AdiExportMode mode);

/// 12 numbers per line: row-major [R | t] of each pose.
std::string format_pose_line(const RigidTransform& pose);
void write_poses(const PoseTrajectory& traj, const fs::path& path);
/// Timestamps are written to `<path>.times` when present; read_poses uses them
/// or falls back to 0, 1, 2, ... Throws MissingFile, MalformedNumber,
/// MissingField.
PoseTrajectory read_poses(const fs::path& path);

}  // namespace adinav::kitti

#endif  // ADINAV_KITTI_IO_HPP
