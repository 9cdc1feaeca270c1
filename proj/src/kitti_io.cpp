#include "adinav/kitti_io.hpp"

#include "adinav/file_util.hpp"
#include "adinav/image_io.hpp"
#include "adinav/key_value.hpp"
#include "adinav/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

namespace adinav::kitti {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Axis swaps between the file's (ENU nav, FLU body) and ours (NED, FRD).
const Mat3& enu_to_ned() {
  static const Mat3 m = (Mat3() << 0, 1, 0, 1, 0, 0, 0, 0, -1).finished();
  return m;
}
const Mat3& frd_to_flu() {
  static const Mat3 m = Vec3(1, -1, -1).asDiagonal();
  return m;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view ext) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingFile, "missing directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Howard Hinnant's days_from_civil / civil_from_days.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

std::int64_t parse_digits(std::string_view s, std::string_view whole) {
  if (s.empty()) throw Error(ErrorCode::MalformedNumber, "bad timestamp '" + std::string(whole) + "'");
  std::int64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw Error(ErrorCode::MalformedNumber, "bad timestamp '" + std::string(whole) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

Mat3 mat3_from(const std::vector<double>& v) {
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = v[static_cast<std::size_t>(i)];
  return m;
}

std::string join(const double* v, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += fmt17(v[i]);
  }
  return s;
}

std::string mat3_text(const Mat3& m) {
  double v[9];
  for (int i = 0; i < 9; ++i) v[i] = m(i / 3, i % 3);
  return join(v, 9);
}

}  // namespace

// ---------------------------------------------------------------- velodyne

PointCloud decode_velodyne(const std::vector<std::uint8_t>& bytes, std::string_view origin) {
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::MalformedFile, std::string(origin) + ": size " + std::to_string(bytes.size()) +
                                              " is not a multiple of 16 bytes");
  }
  PointCloud cloud;
  const std::size_t n = bytes.size() / 16;
  cloud.points.reserve(n);
  cloud.reflectance.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    float f[4];
    for (int k = 0; k < 4; ++k) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[16 * i + 4 * k + b]) << (8 * b);
      f[k] = std::bit_cast<float>(u);
    }
    cloud.points.emplace_back(f[0], f[1], f[2]);
    cloud.reflectance.push_back(f[3]);
  }
  cloud.frame = SensorFrame::lidar;
  return cloud;
}

PointCloud read_velodyne(const fs::path& path) { return decode_velodyne(read_file_bytes(path), path.string()); }

std::vector<std::uint8_t> encode_velodyne(const PointCloud& cloud) {
  std::vector<std::uint8_t> out;
  out.reserve(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const float f[4] = {static_cast<float>(cloud.points[i].x()), static_cast<float>(cloud.points[i].y()),
                        static_cast<float>(cloud.points[i].z()),
                        i < cloud.reflectance.size() ? cloud.reflectance[i] : 0.0f};
    for (float v : f) {
      const auto u = std::bit_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
    }
  }
  return out;
}

void write_velodyne(const fs::path& path, const PointCloud& cloud) { write_file_atomic(path, encode_velodyne(cloud)); }

// ---------------------------------------------------------------- timestamps

Timestamp parse_timestamp(std::string_view text) {
  const std::string_view s = trim(text);
  // YYYY-MM-DD HH:MM:SS[.fffffffff]
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || s[10] != ' ' || s[13] != ':' || s[16] != ':') {
    throw Error(ErrorCode::MalformedNumber, "bad timestamp '" + std::string(s) + "'");
  }
  const auto y = parse_digits(s.substr(0, 4), s);
  const auto mo = parse_digits(s.substr(5, 2), s);
  const auto d = parse_digits(s.substr(8, 2), s);
  const auto hh = parse_digits(s.substr(11, 2), s);
  const auto mm = parse_digits(s.substr(14, 2), s);
  const auto ss = parse_digits(s.substr(17, 2), s);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || hh > 23 || mm > 59 || ss > 60) {
    throw Error(ErrorCode::MalformedNumber, "timestamp field out of range '" + std::string(s) + "'");
  }
  std::int64_t nanos = 0;
  if (s.size() > 19) {
    if (s[19] != '.' || s.size() > 29) throw Error(ErrorCode::MalformedNumber, "bad timestamp '" + std::string(s) + "'");
    const auto frac = s.substr(20);
    nanos = parse_digits(frac, s);
    for (std::size_t i = frac.size(); i < 9; ++i) nanos *= 10;
  }
  Timestamp t;
  t.seconds = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 + hh * 3600 + mm * 60 + ss;
  t.nanos = nanos;
  return t;
}

std::string format_timestamp(const Timestamp& t) {
  std::int64_t days = t.seconds / 86400;
  std::int64_t rem = t.seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(days, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u %02lld:%02lld:%02lld.%09lld", static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60), static_cast<long long>(t.nanos));
  return buf;
}

Timestamp timestamp_from_relative(double seconds, std::int64_t epoch) {
  const auto total = static_cast<std::int64_t>(std::llround(seconds * 1e9));
  std::int64_t s = total / 1000000000;
  std::int64_t ns = total % 1000000000;
  if (ns < 0) {
    ns += 1000000000;
    --s;
  }
  return {epoch + s, ns};
}

std::vector<Timestamp> read_timestamps(const fs::path& path) {
  const std::string text = read_file_text(path);
  std::vector<Timestamp> out;
  for (auto line : lines_of(text)) {
    if (trim(line).empty()) continue;
    out.push_back(parse_timestamp(line));
  }
  return out;
}

void write_timestamps(const fs::path& path, const std::vector<Timestamp>& stamps) {
  std::string text;
  for (const auto& t : stamps) text += format_timestamp(t) + "\n";
  write_file_atomic(path, text);
}

// ---------------------------------------------------------------- oxts

OxtsRecord parse_oxts_line(std::string_view line, std::string_view origin) {
  const auto tok = split_ws(line);
  if (tok.size() != kOxtsFieldCount) {
    throw Error(ErrorCode::MissingField, std::string(origin) + ": expected 30 fields, found " +
                                             std::to_string(tok.size()));
  }
  double v[kOxtsFieldCount];
  for (std::size_t i = 0; i < kOxtsFieldCount; ++i) v[i] = parse_double(tok[i], origin);
  if (std::abs(v[0]) > 90.0 || std::abs(v[1]) > 180.0) {
    throw Error(ErrorCode::InvalidArgument, std::string(origin) + ": latitude/longitude out of range");
  }
  auto as_int = [&](std::size_t i) {
    if (v[i] != std::floor(v[i]) || std::abs(v[i]) > 1e9) {
      throw Error(ErrorCode::MalformedNumber, std::string(origin) + ": status field " + std::to_string(i) +
                                                  " is not an integer");
    }
    return static_cast<int>(v[i]);
  };
  OxtsRecord r;
  r.lat = v[0] * kDeg;
  r.lon = v[1] * kDeg;
  r.alt = v[2];
  r.roll = v[3];
  r.pitch = v[4];
  r.yaw = v[5];
  r.vn = v[6];
  r.ve = v[7];
  r.vf = v[8];
  r.vl = v[9];
  r.vu = v[10];
  r.ax = v[11];
  r.ay = v[12];
  r.az = v[13];
  r.af = v[14];
  r.al = v[15];
  r.au = v[16];
  r.wx = v[17];
  r.wy = v[18];
  r.wz = v[19];
  r.wf = v[20];
  r.wl = v[21];
  r.wu = v[22];
  r.pos_accuracy = v[23];
  r.vel_accuracy = v[24];
  r.navstat = as_int(25);
  r.numsats = as_int(26);
  r.posmode = as_int(27);
  r.velmode = as_int(28);
  r.orimode = as_int(29);
  return r;
}

std::string format_oxts_line(const OxtsRecord& r) {
  const double v[] = {r.lat / kDeg, r.lon / kDeg, r.alt, r.roll, r.pitch, r.yaw, r.vn, r.ve,
                      r.vf, r.vl, r.vu, r.ax, r.ay, r.az, r.af, r.al, r.au, r.wx, r.wy, r.wz,
                      r.wf, r.wl, r.wu, r.pos_accuracy, r.vel_accuracy};
  std::string s = join(v, std::size(v));
  for (int i : {r.navstat, r.numsats, r.posmode, r.velmode, r.orimode}) s += " " + std::to_string(i);
  return s;
}

std::vector<OxtsRecord> read_oxts(const fs::path& dir, std::optional<std::int64_t> epoch) {
  const auto files = sorted_files(dir / "data", ".txt");
  const auto stamps = read_timestamps(dir / "timestamps.txt");
  if (stamps.size() != files.size()) {
    throw Error(ErrorCode::MalformedFile, dir.string() + ": " + std::to_string(files.size()) + " records but " +
                                              std::to_string(stamps.size()) + " timestamps");
  }
  const std::int64_t ep = epoch ? *epoch : (stamps.empty() ? 0 : stamps.front().seconds);
  std::vector<OxtsRecord> out;
  out.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string text = read_file_text(files[i]);
    OxtsRecord r = parse_oxts_line(trim(text), files[i].string());
    r.timestamp = stamps[i].relative_to(ep);
    out.push_back(r);
  }
  return out;
}

void write_oxts(const fs::path& dir, const std::vector<OxtsRecord>& records, std::int64_t epoch) {
  fs::create_directories(dir / "data");
  std::vector<Timestamp> stamps;
  char name[32];
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::snprintf(name, sizeof name, "%010zu.txt", i);
    write_file_atomic(dir / "data" / name, format_oxts_line(records[i]) + "\n");
    stamps.push_back(timestamp_from_relative(records[i].timestamp, epoch));
  }
  write_timestamps(dir / "timestamps.txt", stamps);
}

Mat3 oxts_attitude(const OxtsRecord& r) {
  const Mat3 c_flu_enu = geodesy::euler_to_matrix(r.roll, r.pitch, r.yaw);
  return enu_to_ned() * c_flu_enu * frd_to_flu();
}

geodesy::GeodeticPosition oxts_position(const OxtsRecord& r) { return {r.lat, r.lon, r.alt}; }

Vec3 oxts_velocity(const OxtsRecord& r) {
  const Mat3 c_flu_enu = geodesy::euler_to_matrix(r.roll, r.pitch, r.yaw);
  const Vec3 v_enu = c_flu_enu * Vec3(r.vf, r.vl, r.vu);
  return {r.vn, r.ve, -v_enu.z()};
}

ins::NavState oxts_nav_state(const OxtsRecord& r) {
  ins::NavState s;
  s.pos = oxts_position(r);
  s.velocity = oxts_velocity(r);
  s.c_b_n = oxts_attitude(r);
  s.timestamp = r.timestamp;
  return s;
}

ins::ImuSample oxts_imu(const OxtsRecord& r, ImuTriplet triplet) {
  ins::ImuSample s;
  if (triplet == ImuTriplet::xyz) {
    s.specific_force = Vec3(r.ax, -r.ay, -r.az);
    s.angular_rate = Vec3(r.wx, -r.wy, -r.wz);
  } else {
    s.specific_force = Vec3(r.af, -r.al, -r.au);
    s.angular_rate = Vec3(r.wf, -r.wl, -r.wu);
  }
  s.timestamp = r.timestamp;
  return s;
}

kf::AidingMeasurement oxts_aiding(const OxtsRecord& r) {
  kf::AidingMeasurement m;
  m.pos = oxts_position(r);
  m.velocity = oxts_velocity(r);
  m.timestamp = r.timestamp;
  if (r.pos_accuracy > 0.0) m.pos_sigma = Vec3::Constant(r.pos_accuracy);
  if (r.vel_accuracy > 0.0) m.vel_sigma = Vec3::Constant(r.vel_accuracy);
  return m;
}

void set_oxts_navigation(OxtsRecord& r, const ins::NavState& nav) {
  r.lat = nav.pos.latitude;
  r.lon = nav.pos.longitude;
  r.alt = nav.pos.height;
  const Mat3 c_flu_enu = enu_to_ned().transpose() * nav.c_b_n * frd_to_flu().transpose();
  const geodesy::Euler e = geodesy::matrix_to_euler(c_flu_enu);
  r.roll = e.roll;
  r.pitch = e.pitch;
  r.yaw = e.yaw;
  r.vn = nav.velocity.x();
  r.ve = nav.velocity.y();
  const Vec3 v_enu(nav.velocity.y(), nav.velocity.x(), -nav.velocity.z());
  const Vec3 v_flu = c_flu_enu.transpose() * v_enu;
  r.vf = v_flu.x();
  r.vl = v_flu.y();
  r.vu = v_flu.z();
  r.timestamp = nav.timestamp;
}

void set_oxts_imu(OxtsRecord& r, const ins::ImuSample& imu) {
  const Vec3 f = frd_to_flu() * imu.specific_force;
  const Vec3 w = frd_to_flu() * imu.angular_rate;
  r.ax = r.af = f.x();
  r.ay = r.al = f.y();
  r.az = r.au = f.z();
  r.wx = r.wf = w.x();
  r.wy = r.wl = w.y();
  r.wz = r.wu = w.z();
}

// ---------------------------------------------------------------- calibration

CalibFile parse_calib_file(std::string_view text, std::string_view origin) {
  CalibFile f;
  std::size_t n = 0;
  for (auto line : lines_of(text)) {
    ++n;
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw Error(ErrorCode::MalformedFile, std::string(origin) + ":" + std::to_string(n) + ": expected 'key: values'");
    }
    f.entries.emplace_back(std::string(trim(line.substr(0, colon))), std::string(trim(line.substr(colon + 1))));
  }
  return f;
}

bool CalibFile::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; });
}

std::vector<double> CalibFile::numbers(const std::string& key, std::size_t expected) const {
  for (const auto& [k, v] : entries) {
    if (k != key) continue;
    auto out = parse_doubles(v, key);
    if (out.size() != expected) {
      throw Error(ErrorCode::MissingField, key + ": expected " + std::to_string(expected) + " values, found " +
                                               std::to_string(out.size()));
    }
    return out;
  }
  throw Error(ErrorCode::MissingField, "calibration key '" + key + "' not found");
}

CalibrationSet read_calibration(const fs::path& dir, int camera) {
  const auto velo = parse_calib_file(read_file_text(dir / "calib_velo_to_cam.txt"), "calib_velo_to_cam.txt");
  const auto cam = parse_calib_file(read_file_text(dir / "calib_cam_to_cam.txt"), "calib_cam_to_cam.txt");
  const auto imu = parse_calib_file(read_file_text(dir / "calib_imu_to_velo.txt"), "calib_imu_to_velo.txt");
  char key[32];

  CalibrationSet c;
  c.lidar_to_camera.rotation = mat3_from(velo.numbers("R", 9));
  const auto t = velo.numbers("T", 3);
  c.lidar_to_camera.translation = Vec3(t[0], t[1], t[2]);

  c.rect = Mat4::Identity();
  c.rect.block<3, 3>(0, 0) = mat3_from(cam.numbers("R_rect_00", 9));
  std::snprintf(key, sizeof key, "P_rect_%02d", camera);
  const auto p = cam.numbers(key, 12);
  for (int i = 0; i < 12; ++i) c.projection(i / 4, i % 4) = p[static_cast<std::size_t>(i)];
  std::snprintf(key, sizeof key, "S_rect_%02d", camera);
  const auto s = cam.numbers(key, 2);
  if (!(s[0] >= 1.0 && s[1] >= 1.0)) throw Error(ErrorCode::MalformedNumber, std::string(key) + ": bad image size");
  c.cols = static_cast<std::size_t>(std::llround(s[0]));
  c.rows = static_cast<std::size_t>(std::llround(s[1]));

  RigidTransform imu_to_velo;
  imu_to_velo.rotation = mat3_from(imu.numbers("R", 9));
  const auto ti = imu.numbers("T", 3);
  imu_to_velo.translation = Vec3(ti[0], ti[1], ti[2]);
  c.body_to_lidar = imu_to_velo * RigidTransform{frd_to_flu(), Vec3::Zero()};
  return c;
}

void write_calibration(const fs::path& dir, const CalibrationSet& calib, int camera) {
  fs::create_directories(dir);
  const std::string stamp = "calib_time: 01-Jan-2000 00:00:00\n";
  const auto& lc = calib.lidar_to_camera;
  write_file_atomic(dir / "calib_velo_to_cam.txt",
                    stamp + "R: " + mat3_text(lc.rotation) + "\nT: " + join(lc.translation.data(), 3) + "\n");

  char key[32];
  std::string cam = stamp + "R_rect_00: " + mat3_text(calib.rect.block<3, 3>(0, 0)) + "\n";
  double p[12];
  for (int i = 0; i < 12; ++i) p[i] = calib.projection(i / 4, i % 4);
  std::snprintf(key, sizeof key, "S_rect_%02d: ", camera);
  const double size[2] = {static_cast<double>(calib.cols), static_cast<double>(calib.rows)};
  cam += key + join(size, 2) + "\n";
  std::snprintf(key, sizeof key, "P_rect_%02d: ", camera);
  cam += key + join(p, 12) + "\n";
  write_file_atomic(dir / "calib_cam_to_cam.txt", cam);

  const RigidTransform imu_to_velo = calib.body_to_lidar * RigidTransform{frd_to_flu().transpose(), Vec3::Zero()};
  write_file_atomic(dir / "calib_imu_to_velo.txt", stamp + "R: " + mat3_text(imu_to_velo.rotation) +
                                                       "\nT: " + join(imu_to_velo.translation.data(), 3) + "\n");
}

// ---------------------------------------------------------------- sequence

SequenceManifest SequenceManifest::scan(const fs::path& root) {
  SequenceManifest m;
  m.root = root;
  if (!fs::is_directory(root)) throw Error(ErrorCode::MissingFile, "missing sequence directory: " + root.string());
  if (fs::exists(root / "calib_cam_to_cam.txt")) {
    m.calib_dir = root;
  } else if (fs::exists(root.parent_path() / "calib_cam_to_cam.txt")) {
    m.calib_dir = root.parent_path();
  } else {
    throw Error(ErrorCode::MissingFile, "no calib_cam_to_cam.txt in " + root.string() + " or its parent");
  }

  const auto oxts_stamps = read_timestamps(root / "oxts" / "timestamps.txt");
  const auto velo_stamps = read_timestamps(root / "velodyne_points" / "timestamps.txt");
  if (oxts_stamps.empty() || velo_stamps.empty()) throw Error(ErrorCode::EmptyStream, "empty oxts or velodyne stream");
  m.epoch = std::min(oxts_stamps.front().seconds, velo_stamps.front().seconds);
  m.oxts = read_oxts(root / "oxts", m.epoch);

  const auto clouds = sorted_files(root / "velodyne_points" / "data", ".bin");
  if (clouds.size() != velo_stamps.size()) {
    throw Error(ErrorCode::MalformedFile, "velodyne: " + std::to_string(clouds.size()) + " files but " +
                                              std::to_string(velo_stamps.size()) + " timestamps");
  }
  std::vector<fs::path> images;
  std::vector<Timestamp> image_stamps;
  if (fs::is_directory(root / "image_02" / "data")) {
    images = sorted_files(root / "image_02" / "data", ".png");
    image_stamps = read_timestamps(root / "image_02" / "timestamps.txt");
    if (images.size() != clouds.size() || image_stamps.size() != clouds.size()) {
      throw Error(ErrorCode::MalformedFile, "image_02 and velodyne_points frame counts differ");
    }
  }

  auto check_monotone = [](const std::vector<Timestamp>& s, const char* what) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (!(s[i - 1] < s[i])) {
        throw Error(ErrorCode::NonMonotonicTime, std::string(what) + " timestamps not increasing at " + std::to_string(i));
      }
    }
  };
  check_monotone(oxts_stamps, "oxts");
  check_monotone(velo_stamps, "velodyne");
  check_monotone(image_stamps, "image_02");

  for (std::size_t i = 0; i < clouds.size(); ++i) {
    FrameEntry f;
    f.index = i;
    f.cloud = clouds[i];
    f.cloud_time = velo_stamps[i].relative_to(m.epoch);
    if (!images.empty()) {
      f.image = images[i];
      f.image_time = image_stamps[i].relative_to(m.epoch);
    } else {
      f.image_time = f.cloud_time;
    }
    m.frames.push_back(f);
  }
  return m;
}

// ---------------------------------------------------------------- products

Tensor adi_to_tensor(const adi::ThreeChannelAdi& adi) {
  const std::size_t h = adi.channels[0].rows(), w = adi.channels[0].cols();
  Tensor t({3, h, w});
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& ch = adi.channels[c];
    if (ch.rows() != h || ch.cols() != w) throw Error(ErrorCode::ShapeMismatch, "ADI channels differ in size");
    std::copy(ch.values().data.begin(), ch.values().data.end(), t.data.begin() + static_cast<long>(c * h * w));
  }
  return t;
}

adi::ThreeChannelAdi tensor_to_adi(const Tensor& t, double timestamp) {
  if (t.shape.size() != 3 || t.shape[0] != 3) throw Error(ErrorCode::ShapeMismatch, "ADI tensor must be 3 x H x W");
  const std::size_t h = t.shape[1], w = t.shape[2];
  adi::ThreeChannelAdi out;
  out.timestamp = timestamp;
  for (std::size_t c = 0; c < 3; ++c) {
    out.channels[c] = adi::AdiImage(h, w);
    std::copy(t.data.begin() + static_cast<long>(c * h * w), t.data.begin() + static_cast<long>((c + 1) * h * w),
              out.channels[c].values().data.begin());
  }
  return out;
}

std::array<ChannelRange, 3> write_adi(const adi::ThreeChannelAdi& adi, const fs::path& path, AdiExportMode mode) {
  std::array<ChannelRange, 3> ranges{};
  if (mode == AdiExportMode::float32) {
    write_tensor(path, adi_to_tensor(adi), TensorDtype::float32);
    return ranges;
  }
  const std::size_t h = adi.channels[0].rows(), w = adi.channels[0].cols();
  RasterImage img;
  img.rows = h;
  img.cols = w;
  img.channels = 3;
  img.bit_depth = 8;
  img.data.assign(h * w * 3, 0);
  std::string sidecar = "# per-channel min-max normalization: v = min + p / 255 * (max - min); p = 0 also marks no data\n";
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& vals = adi.channels[c].values().data;
    if (vals.size() != h * w) throw Error(ErrorCode::ShapeMismatch, "ADI channels differ in size");
    ChannelRange& r = ranges[c];
    bool any = false;
    for (double v : vals) {
      if (std::isnan(v)) continue;
      r.min = any ? std::min(r.min, v) : v;
      r.max = any ? std::max(r.max, v) : v;
      any = true;
    }
    r.degenerate = !any || !(r.max > r.min);
    if (!r.degenerate) {
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (std::isnan(vals[i])) continue;
        img.data[i * 3 + c] = static_cast<std::uint16_t>(std::lround(255.0 * (vals[i] - r.min) / (r.max - r.min)));
      }
    }
    sidecar += "channel" + std::to_string(c) + "_min = " + fmt17(r.min) + "\n";
    sidecar += "channel" + std::to_string(c) + "_max = " + fmt17(r.max) + "\n";
    sidecar += "channel" + std::to_string(c) + "_degenerate = " + (r.degenerate ? "1" : "0") + "\n";
  }
  write_png(path, img);
  write_file_atomic(fs::path(path.string() + ".range"), sidecar);
  return ranges;
}

std::string format_pose_line(const RigidTransform& pose) {
  double v[12];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) v[r * 4 + c] = pose.rotation(r, c);
    v[r * 4 + 3] = pose.translation(r);
  }
  return join(v, 12);
}

void write_poses(const PoseTrajectory& traj, const fs::path& path) {
  std::string text, times;
  for (const auto& p : traj.poses()) {
    text += format_pose_line(p.pose) + "\n";
    times += fmt17(p.timestamp) + "\n";
  }
  write_file_atomic(path, text);
  write_file_atomic(fs::path(path.string() + ".times"), times);
}

PoseTrajectory read_poses(const fs::path& path) {
  const std::string text = read_file_text(path);
  std::vector<double> times;
  const fs::path tpath(path.string() + ".times");
  if (fs::exists(tpath)) {
    const std::string ttext = read_file_text(tpath);
    for (auto line : lines_of(ttext)) {
      if (!trim(line).empty()) times.push_back(parse_double(line, tpath.string()));
    }
  }
  std::vector<TimedPose> poses;
  std::size_t n = 0;
  for (auto line : lines_of(text)) {
    ++n;
    if (trim(line).empty()) continue;
    const auto v = parse_doubles(line, path.string());
    if (v.size() != 12) {
      throw Error(ErrorCode::MissingField, path.string() + ":" + std::to_string(n) + ": expected 12 values");
    }
    TimedPose p;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) p.pose.rotation(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
      p.pose.translation(r) = v[static_cast<std::size_t>(r * 4 + 3)];
    }
    p.timestamp = times.empty() ? static_cast<double>(poses.size()) : 0.0;
    poses.push_back(p);
  }
  if (!times.empty()) {
    if (times.size() != poses.size()) throw Error(ErrorCode::MalformedFile, tpath.string() + ": count differs from poses");
    for (std::size_t i = 0; i < poses.size(); ++i) poses[i].timestamp = times[i];
  }
  return PoseTrajectory(std::move(poses));
}

}  // namespace adinav::kitti
