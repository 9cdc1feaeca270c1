#include "adinav/scenario.hpp"

#include "adinav/file_util.hpp"
#include "adinav/kitti_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

namespace adinav::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double speed_at(const ScenarioSpec& s, double t, double& heading) {
  switch (s.trajectory) {
    case TrajectoryKind::stationary:
      heading = s.heading;
      return 0.0;
    case TrajectoryKind::constant_velocity:
      heading = s.heading;
      return s.speed;
    case TrajectoryKind::circular:
      heading = s.heading + s.speed / s.turn_radius * t;
      return s.speed;
    case TrajectoryKind::waypoints: {
      const auto& k = s.keyframes;
      if (t <= k.front().time) {
        heading = k.front().heading;
        return k.front().speed;
      }
      if (t >= k.back().time) {
        heading = k.back().heading;
        return k.back().speed;
      }
      const auto hi = std::upper_bound(k.begin(), k.end(), t, [](double v, const VelocityKeyframe& f) { return v < f.time; });
      const auto lo = hi - 1;
      const double a = (t - lo->time) / (hi->time - lo->time);
      heading = lo->heading + a * (hi->heading - lo->heading);
      return lo->speed + a * (hi->speed - lo->speed);
    }
  }
  return 0.0;
}

Mat3 yaw_matrix(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return (Mat3() << c, -s, 0, s, c, 0, 0, 0, 1).finished();
}

Vec3 noise3(std::mt19937_64& rng, std::normal_distribution<double>& n, double sigma) {
  const double a = n(rng), b = n(rng), c = n(rng);
  return Vec3(a, b, c) * sigma;
}

geodesy::GeodeticPosition offset_position(const geodesy::GeodeticPosition& p, const Vec3& neu,
                                          const geodesy::EarthModel& earth) {
  geodesy::GeodeticPosition out = p;
  out.latitude += neu.x() / (geodesy::meridian_radius(p.latitude) + p.height);
  out.longitude = geodesy::wrap_angle(
      p.longitude + neu.y() / ((geodesy::normal_radius(p.latitude, earth.normal_radius_form) + p.height) *
                               std::cos(p.latitude)));
  out.height += neu.z();
  return out;
}

std::optional<double> ray_box(const Vec3& o, const Vec3& d, const Box& box, double time) {
  const Mat3 r = yaw_matrix(box.yaw);
  const Vec3 q = r.transpose() * (o - box.center_at(time));
  const Vec3 e = r.transpose() * d;
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double h = box.half_extents(i);
    if (std::abs(e(i)) < 1e-15) {
      if (std::abs(q(i)) > h) return std::nullopt;
      continue;
    }
    double a = (-h - q(i)) / e(i);
    double b = (h - q(i)) / e(i);
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (!(t0 <= t1) || !(t0 > 1e-9)) return std::nullopt;
  return t0;
}

}  // namespace

CalibrationSet default_calibration(std::size_t rows, std::size_t cols, double focal) {
  CalibrationSet c;
  c.lidar_to_camera.rotation << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  c.lidar_to_camera.translation = Vec3(0.0, -0.08, -0.27);
  c.rect = Mat4::Identity();
  c.projection << focal, 0, 0.5 * static_cast<double>(cols), 0, 0, focal, 0.46 * static_cast<double>(rows), 0, 0, 0, 1, 0;
  c.body_to_lidar.rotation = Vec3(1, -1, -1).asDiagonal();
  c.body_to_lidar.translation = Vec3(-0.81, 0.32, -0.80);
  c.rows = rows;
  c.cols = cols;
  return c;
}

void ScenarioSpec::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, "scenario: " + m); };
  if (!(duration > 0.0)) bad("duration must be > 0");
  if (!(imu_rate > 0.0)) bad("imu_rate must be > 0");
  if (!(aiding_rate >= 0.0) || !(lidar_rate >= 0.0)) bad("rates must be >= 0");
  auto check_ratio = [&](double rate, const char* what) {
    if (rate == 0.0) return;
    const double r = imu_rate / rate;
    if (std::abs(r - std::round(r)) > 1e-9 || r < 1.0) bad(std::string(what) + " must divide imu_rate");
  };
  check_ratio(aiding_rate, "aiding_rate");
  check_ratio(lidar_rate, "lidar_rate");
  if (trajectory == TrajectoryKind::circular && !(std::abs(turn_radius) > 0.0)) bad("turn_radius must be non-zero");
  if (trajectory == TrajectoryKind::waypoints) {
    if (keyframes.empty()) bad("waypoints trajectory needs keyframes");
    for (std::size_t i = 1; i < keyframes.size(); ++i) {
      if (!(keyframes[i].time > keyframes[i - 1].time)) bad("keyframe times must increase");
    }
  }
  if (accel_noise < 0.0 || gyro_noise < 0.0 || aiding_pos_sigma < 0.0 || aiding_vel_sigma < 0.0) {
    bad("noise parameters must be >= 0");
  }
  if (lidar.beams < 1 || lidar.azimuth_steps < 1 || !(lidar.max_range > lidar.min_range)) bad("bad lidar model");
  for (const auto& b : scene.boxes) {
    if (!(b.half_extents.minCoeff() > 0.0)) bad("box half extents must be > 0");
  }
  calibration.validate();
}

ScenarioSpec ScenarioSpec::from_config(const KeyValueConfig& cfg) {
  ScenarioSpec s;
  if (const auto kind = cfg.find("trajectory")) {
    if (*kind == "stationary") s.trajectory = TrajectoryKind::stationary;
    else if (*kind == "constant_velocity") s.trajectory = TrajectoryKind::constant_velocity;
    else if (*kind == "circular") s.trajectory = TrajectoryKind::circular;
    else if (*kind == "waypoints") s.trajectory = TrajectoryKind::waypoints;
    else throw Error(ErrorCode::InvalidArgument, "unknown trajectory '" + *kind + "'");
  }
  s.duration = cfg.get_double("duration", s.duration);
  s.imu_rate = cfg.get_double("imu_rate", s.imu_rate);
  s.aiding_rate = cfg.get_double("aiding_rate", s.aiding_rate);
  s.lidar_rate = cfg.get_double("lidar_rate", s.lidar_rate);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long>(s.seed)));
  s.start.latitude = cfg.get_double("latitude_deg", s.start.latitude / kDeg) * kDeg;
  s.start.longitude = cfg.get_double("longitude_deg", s.start.longitude / kDeg) * kDeg;
  s.start.height = cfg.get_double("height", s.start.height);
  s.roll = cfg.get_double("roll_deg", 0.0) * kDeg;
  s.pitch = cfg.get_double("pitch_deg", 0.0) * kDeg;
  s.heading = cfg.get_double("heading_deg", 0.0) * kDeg;
  s.speed = cfg.get_double("speed", s.speed);
  s.turn_radius = cfg.get_double("turn_radius", s.turn_radius);
  if (cfg.has("waypoints")) {
    const auto v = cfg.get_doubles("waypoints");
    if (v.size() % 3 != 0) throw Error(ErrorCode::InvalidArgument, "waypoints: expected time speed heading_deg triples");
    for (std::size_t i = 0; i < v.size(); i += 3) s.keyframes.push_back({v[i], v[i + 1], v[i + 2] * kDeg});
  }
  auto vec3 = [&](const char* key, Vec3 fallback) {
    if (!cfg.has(key)) return fallback;
    const auto v = cfg.get_doubles(key);
    if (v.size() != 3) throw Error(ErrorCode::InvalidArgument, std::string(key) + ": expected 3 values");
    return Vec3(v[0], v[1], v[2]);
  };
  s.accel_bias = vec3("accel_bias", s.accel_bias);
  s.gyro_bias = vec3("gyro_bias", s.gyro_bias);
  s.accel_noise = cfg.get_double("accel_noise", s.accel_noise);
  s.gyro_noise = cfg.get_double("gyro_noise", s.gyro_noise);
  s.aiding_pos_sigma = cfg.get_double("aiding_pos_sigma", s.aiding_pos_sigma);
  s.aiding_vel_sigma = cfg.get_double("aiding_vel_sigma", s.aiding_vel_sigma);
  s.lidar.beams = static_cast<int>(cfg.get_int("lidar_beams", s.lidar.beams));
  s.lidar.azimuth_steps = static_cast<int>(cfg.get_int("lidar_azimuth_steps", s.lidar.azimuth_steps));
  s.lidar.min_elevation = cfg.get_double("lidar_min_elevation_deg", s.lidar.min_elevation / kDeg) * kDeg;
  s.lidar.max_elevation = cfg.get_double("lidar_max_elevation_deg", s.lidar.max_elevation / kDeg) * kDeg;
  s.lidar.max_range = cfg.get_double("lidar_max_range", s.lidar.max_range);
  s.scene.ground_z = cfg.get_double("ground_depth", s.scene.ground_z);
  // box = cx cy cz hx hy hz yaw_deg [vx vy vz]; box1, box2, ... for more
  for (int i = 0; i < 64; ++i) {
    const std::string key = i == 0 ? "box" : "box" + std::to_string(i);
    if (!cfg.has(key)) continue;
    const auto v = cfg.get_doubles(key);
    if (v.size() != 7 && v.size() != 10) throw Error(ErrorCode::InvalidArgument, key + ": expected 7 or 10 values");
    Box b;
    b.center = Vec3(v[0], v[1], v[2]);
    b.half_extents = Vec3(v[3], v[4], v[5]);
    b.yaw = v[6] * kDeg;
    if (v.size() == 10) b.velocity = Vec3(v[7], v[8], v[9]);
    s.scene.boxes.push_back(b);
  }
  const auto rows = static_cast<std::size_t>(cfg.get_int("image_rows", 375));
  const auto cols = static_cast<std::size_t>(cfg.get_int("image_cols", 1242));
  s.calibration = default_calibration(rows, cols, cfg.get_double("focal", 721.5377));
  s.mechanization.earth_rate = cfg.get_bool("earth_rate", true);
  s.mechanization.transport_rate = cfg.get_bool("transport_rate", true);
  s.validate();
  return s;
}

std::vector<ins::NavState> true_trajectory(const ScenarioSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::llround(spec.duration * spec.imu_rate));
  std::vector<ins::NavState> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / spec.imu_rate;
    double heading = 0.0;
    const double v = speed_at(spec, t, heading);
    ins::NavState s;
    s.timestamp = t;
    s.velocity = Vec3(v * std::cos(heading), v * std::sin(heading), 0.0);
    s.c_b_n = geodesy::euler_to_matrix(spec.roll, spec.pitch, heading);
    if (k == 0) {
      s.pos = spec.start;
    } else {
      const auto& prev = out.back();
      s.pos = ins::position_update(prev, s.velocity, t - prev.timestamp, spec.mechanization);
    }
    out.push_back(s);
  }
  return out;
}

std::vector<ins::ImuSample> inverse_mechanization(std::span<const ins::NavState> states,
                                                  const ins::MechanizationOptions& opt, double max_specific_force) {
  std::vector<ins::ImuSample> out;
  if (states.size() < 2) return out;
  out.reserve(states.size() - 1);
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const auto& s = states[k];
    const auto& n = states[k + 1];
    const double tau = n.timestamp - s.timestamp;
    if (!(tau > 0.0)) throw Error(ErrorCode::NonMonotonicTime, "true trajectory timestamps must increase");

    // The first-order update followed by symmetric orthogonalization rotates
    // by atan(|a|) about a, so a = axis * tan(angle) reproduces C(+) exactly.
    const Eigen::AngleAxisd rel(Mat3(s.c_b_n.transpose() * n.c_b_n));
    if (rel.angle() >= 0.5 * std::numbers::pi - 1e-6) {
      throw Error(ErrorCode::InfeasibleTrajectory, "attitude change per step too large");
    }
    const Vec3 a = rel.angle() == 0.0 ? Vec3::Zero() : Vec3(rel.axis() * std::tan(rel.angle()));
    const Vec3 w_ie = ins::earth_rate(s.pos, opt);
    const Vec3 w_en = ins::transport_rate(s.velocity, s.pos, opt);

    ins::ImuSample imu;
    imu.timestamp = n.timestamp;
    imu.angular_rate = a / tau + s.c_b_n.transpose() * (w_ie + w_en);
    const Vec3 f_n = (n.velocity - s.velocity) / tau - geodesy::gravity_ned(s.pos) + (w_en + 2.0 * w_ie).cross(s.velocity);
    imu.specific_force = s.c_b_n.transpose() * f_n;

    if (!(imu.specific_force.norm() <= max_specific_force)) {
      throw Error(ErrorCode::InfeasibleTrajectory,
                  "specific force " + std::to_string(imu.specific_force.norm()) + " m/s^2 at t=" +
                      std::to_string(s.timestamp) + " exceeds the sanity bound");
    }
    if (!(imu.angular_rate.norm() * tau < opt.max_step_rotation)) {
      throw Error(ErrorCode::InfeasibleTrajectory, "turn rate at t=" + std::to_string(s.timestamp) +
                                                       " exceeds the mechanization step bound");
    }
    out.push_back(imu);
  }
  return out;
}

std::optional<Hit> cast_ray(const Vec3& origin, const Vec3& direction, const Scene& scene, double time,
                            double max_range) {
  std::optional<Hit> best;
  if (direction.z() > 1e-12) {
    const double s = (scene.ground_z - origin.z()) / direction.z();
    if (s > 0.0 && s <= max_range) {
      Hit h;
      h.range = s;
      h.point = origin + s * direction;
      h.point.z() = scene.ground_z;
      h.primitive = 0;
      best = h;
    }
  }
  for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
    const auto s = ray_box(origin, direction, scene.boxes[i], time);
    if (!s || *s > max_range || (best && *s >= best->range)) continue;
    Hit h;
    h.range = *s;
    h.point = origin + *s * direction;
    h.primitive = static_cast<int>(i) + 1;
    h.dynamic = scene.boxes[i].moving();
    best = h;
  }
  return best;
}

PointCloud scan_scene(const RigidTransform& lidar_in_local, const Scene& scene, const LidarModel& lidar,
                      double time) {
  PointCloud cloud;
  cloud.frame = SensorFrame::lidar;
  cloud.timestamp = time;
  const RigidTransform local_to_lidar = lidar_in_local.inverse();
  const Vec3& origin = lidar_in_local.translation;
  const double el_step = lidar.beams > 1 ? (lidar.max_elevation - lidar.min_elevation) / (lidar.beams - 1) : 0.0;
  cloud.points.reserve(static_cast<std::size_t>(lidar.beams) * static_cast<std::size_t>(lidar.azimuth_steps) / 2);
  for (int b = 0; b < lidar.beams; ++b) {
    const double el = lidar.max_elevation - b * el_step;
    for (int j = 0; j < lidar.azimuth_steps; ++j) {
      const double az = 2.0 * std::numbers::pi * j / lidar.azimuth_steps;
      const Vec3 d_lidar(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const Vec3 d = lidar_in_local.rotation * d_lidar;
      const auto hit = cast_ray(origin, d, scene, time, lidar.max_range);
      if (!hit || hit->range < lidar.min_range) continue;
      cloud.push_back(local_to_lidar.apply(hit->point), hit->primitive == 0 ? 0.3f : 0.7f,
                      static_cast<std::uint8_t>(hit->dynamic ? 1 : 0));
    }
  }
  return cloud;
}

double surface_distance(const Vec3& p, const Scene& scene, double time) {
  double best = std::abs(p.z() - scene.ground_z);
  for (const auto& box : scene.boxes) {
    const Vec3 q = yaw_matrix(box.yaw).transpose() * (p - box.center_at(time));
    const Vec3 excess = q.cwiseAbs() - box.half_extents;
    const double outside = excess.cwiseMax(0.0).norm();
    const double inside = std::min(excess.maxCoeff(), 0.0);
    best = std::min(best, std::abs(outside + inside));
  }
  return best;
}

PoseTrajectory ScenarioData::truth_poses() const {
  const auto lt = frame();
  std::vector<TimedPose> poses;
  for (std::size_t k : truth.cloud_epochs) {
    poses.push_back({truth.states[k].timestamp, kf::pose_in_frame(truth.states[k], lt)});
  }
  return PoseTrajectory(std::move(poses));
}

std::vector<double> ScenarioData::cloud_times() const {
  std::vector<double> t;
  for (const auto& c : clouds) t.push_back(c.timestamp);
  return t;
}

ScenarioData generate(const ScenarioSpec& spec) {
  ScenarioData out;
  out.truth.states = true_trajectory(spec);
  out.truth.accel_bias = spec.accel_bias;
  out.truth.gyro_bias = spec.gyro_bias;
  out.calibration = spec.calibration;
  out.scene = spec.scene;
  out.imu = inverse_mechanization(out.truth.states, spec.mechanization, spec.max_specific_force);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_rate = std::sqrt(spec.imu_rate);
  for (auto& s : out.imu) {
    s.specific_force += spec.accel_bias + noise3(rng, normal, spec.accel_noise * sqrt_rate);
    s.angular_rate += spec.gyro_bias + noise3(rng, normal, spec.gyro_noise * sqrt_rate);
  }

  const auto& states = out.truth.states;
  out.reported.reserve(states.size());
  for (const auto& s : states) {
    ins::NavState r = s;
    r.pos = offset_position(s.pos, noise3(rng, normal, spec.aiding_pos_sigma), spec.mechanization.earth);
    r.velocity += noise3(rng, normal, spec.aiding_vel_sigma);
    out.reported.push_back(r);
  }
  if (spec.aiding_rate > 0.0) {
    const auto stride = static_cast<std::size_t>(std::llround(spec.imu_rate / spec.aiding_rate));
    for (std::size_t k = stride; k < states.size(); k += stride) {
      kf::AidingMeasurement m;
      m.pos = out.reported[k].pos;
      m.velocity = out.reported[k].velocity;
      m.timestamp = states[k].timestamp;
      out.aiding.push_back(m);
    }
  }

  if (spec.lidar_rate > 0.0) {
    const auto stride = static_cast<std::size_t>(std::llround(spec.imu_rate / spec.lidar_rate));
    const auto lt = out.frame();
    for (std::size_t k = 0; k < states.size(); k += stride) {
      const RigidTransform body = kf::pose_in_frame(states[k], lt);
      const RigidTransform lidar = body * spec.calibration.body_to_lidar.inverse();
      out.clouds.push_back(scan_scene(lidar, spec.scene, spec.lidar, states[k].timestamp));
      out.truth.cloud_epochs.push_back(k);
    }
  }
  return out;
}

void write_sequence(const ScenarioData& data, const ScenarioSpec& spec, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const std::int64_t epoch = kitti::parse_timestamp("2011-09-26 00:00:00").seconds;
  fs::create_directories(dir);
  kitti::write_calibration(dir, data.calibration);

  std::vector<kitti::OxtsRecord> records;
  records.reserve(data.reported.size());
  for (std::size_t k = 0; k < data.reported.size(); ++k) {
    kitti::OxtsRecord r;
    kitti::set_oxts_navigation(r, data.reported[k]);
    if (k > 0) kitti::set_oxts_imu(r, data.imu[k - 1]);
    r.pos_accuracy = spec.aiding_pos_sigma;
    r.vel_accuracy = spec.aiding_vel_sigma;
    r.navstat = 4;
    r.numsats = 10;
    r.posmode = r.velmode = r.orimode = 4;
    records.push_back(r);
  }
  kitti::write_oxts(dir / "oxts", records, epoch);

  fs::create_directories(dir / "velodyne_points" / "data");
  fs::create_directories(dir / "velodyne_points" / "labels");
  std::vector<kitti::Timestamp> stamps;
  char name[32];
  for (std::size_t i = 0; i < data.clouds.size(); ++i) {
    std::snprintf(name, sizeof name, "%010zu.bin", i);
    kitti::write_velodyne(dir / "velodyne_points" / "data" / name, data.clouds[i]);
    write_file_atomic(dir / "velodyne_points" / "labels" / name, data.clouds[i].labels);
    stamps.push_back(kitti::timestamp_from_relative(data.clouds[i].timestamp, epoch));
  }
  kitti::write_timestamps(dir / "velodyne_points" / "timestamps.txt", stamps);

  kitti::write_poses(data.truth_poses(), dir / "truth_poses.txt");
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "accel_bias = %.17g %.17g %.17g\ngyro_bias = %.17g %.17g %.17g\n"
                "origin_latitude = %.17g\norigin_longitude = %.17g\norigin_height = %.17g\n",
                data.truth.accel_bias.x(), data.truth.accel_bias.y(), data.truth.accel_bias.z(),
                data.truth.gyro_bias.x(), data.truth.gyro_bias.y(), data.truth.gyro_bias.z(),
                data.truth.states.front().pos.latitude, data.truth.states.front().pos.longitude,
                data.truth.states.front().pos.height);
  write_file_atomic(dir / "truth.txt", std::string(buf));
}

}  // namespace adinav::sim
