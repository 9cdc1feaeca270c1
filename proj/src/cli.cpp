#include "adinav/cli.hpp"

#include "adinav/file_util.hpp"
#include "adinav/fusion.hpp"
#include "adinav/image_io.hpp"
#include "adinav/metrics.hpp"
#include "adinav/scenario.hpp"
#include "adinav/tensor.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>

namespace adinav::cli {

using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr double kPoseClampTolerance = 0.02;  // [s]

class Staging {
 public:
  explicit Staging(fs::path out) : out_(std::move(out)) {
    const fs::path parent = out_.has_parent_path() ? out_.parent_path() : fs::path(".");
    fs::create_directories(parent);
    dir_ = parent / ("." + out_.filename().string() + ".staging-" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(dir_, ec);
    }
  }

  const fs::path& dir() const { return dir_; }

  void commit() {
    if (fs::exists(out_)) {
      if (!fs::is_directory(out_)) throw Error(ErrorCode::IoError, out_.string() + " exists and is not a directory");
      fs::remove_all(out_);
    }
    fs::rename(dir_, out_);
    committed_ = true;
  }

 private:
  fs::path out_;
  fs::path dir_;
  bool committed_ = false;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<long>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

void write_summary(const fs::path& dir, json summary) {
  summary["version"] = kVersion;
  write_file_atomic(dir / "run_summary.json", summary.dump(2) + "\n");
}

int effective_threads(int requested) { return requested > 0 ? requested : omp_get_num_procs(); }

void log(const CommonOptions& c, const std::string& msg) {
  if (c.verbosity > 0) std::cerr << msg << '\n';
}

std::vector<std::string> known_config_keys() {
  return {"accel_noise", "gyro_noise", "accel_bias_walk", "gyro_bias_walk", "aiding_pos_sigma", "aiding_vel_sigma",
          "init_pos_sigma", "init_vel_sigma", "init_att_sigma", "init_accel_bias_sigma", "init_gyro_bias_sigma",
          "innovation_gate", "time_tolerance", "earth_rate", "transport_rate", "normal_radius_form",
          "max_step_rotation", "adi_window_radius", "adi_threshold", "adi_normalization"};
}

std::vector<std::string> config_warnings(const KeyValueConfig& cfg) {
  std::vector<std::string> w;
  for (const auto& k : cfg.unknown_keys(known_config_keys())) w.push_back("unknown config key '" + k + "'");
  return w;
}

kitti::AdiExportMode export_mode_from(const KeyValueConfig& cfg, kitti::AdiExportMode fallback) {
  const auto v = cfg.find("adi_normalization");
  if (!v) return fallback;
  if (*v == "float" || *v == "raw_float") return kitti::AdiExportMode::float32;
  if (*v == "png8" || *v == "minmax_u8") return kitti::AdiExportMode::png8;
  throw Error(ErrorCode::InvalidArgument, "adi_normalization must be float or png8");
}

const char* mode_name(kitti::AdiExportMode m) { return m == kitti::AdiExportMode::float32 ? "float" : "png8"; }

std::vector<PointCloud> load_history(const kitti::SequenceManifest& seq, std::size_t i) {
  std::vector<PointCloud> h;
  for (std::size_t j = i >= 2 ? i - 2 : 0; j <= i; ++j) {
    PointCloud c = kitti::read_velodyne(seq.frames[j].cloud);
    c.timestamp = seq.frames[j].cloud_time;
    h.push_back(std::move(c));
  }
  return h;
}

template <typename Fn>
void parallel_frames(std::size_t n, int threads, Fn&& fn) {
  std::exception_ptr failure;
  std::mutex m;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    {
      std::lock_guard<std::mutex> lock(m);
      if (failure) continue;
    }
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(m);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string frame_name(std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%010zu%s", i, ext);
  return buf;
}

json stats_json(const adi::DispersionStats& s) {
  return {{"pixels", s.pixels}, {"mean", s.mean}, {"p95", s.p95}, {"max", s.max}};
}

// Road scores from a PNG: first channel scaled to [0, 1].
metrics::ScoreMap read_scores(const fs::path& p) {
  const RasterImage img = read_png(p);
  metrics::ScoreMap s(img.rows, img.cols);
  for (std::size_t r = 0; r < img.rows; ++r) {
    for (std::size_t c = 0; c < img.cols; ++c) s(r, c) = static_cast<double>(img.at(r, c)) / img.max_value();
  }
  return s;
}

// Gray: nonzero = road, all valid. RGB (KITTI road): road iff blue > 0,
// evaluated iff red > 0.
void read_road_gt(const fs::path& p, metrics::BinaryMap& road, metrics::BinaryMap& valid) {
  const RasterImage img = read_png(p);
  road = metrics::BinaryMap(img.rows, img.cols);
  valid = metrics::BinaryMap(img.rows, img.cols, 1);
  for (std::size_t r = 0; r < img.rows; ++r) {
    for (std::size_t c = 0; c < img.cols; ++c) {
      if (img.channels >= 3) {
        road(r, c) = img.at(r, c, 2) > 0;
        valid(r, c) = img.at(r, c, 0) > 0;
      } else {
        road(r, c) = img.at(r, c, 0) > 0;
      }
    }
  }
}

// KITTI depth PNG: uint16 / 256 meters, 0 = no data.
Grid<double> read_depth_png(const fs::path& p) {
  const RasterImage img = read_png(p);
  Grid<double> d(img.rows, img.cols);
  const double scale = img.bit_depth == 16 ? 256.0 : 1.0;
  for (std::size_t r = 0; r < img.rows; ++r) {
    for (std::size_t c = 0; c < img.cols; ++c) d(r, c) = static_cast<double>(img.at(r, c)) / scale;
  }
  return d;
}

std::vector<fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingFile, "missing directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyTaskSet:
      return kUsage;
    case ErrorCode::FrameMismatch:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::MalformedFile:
    case ErrorCode::MalformedNumber:
    case ErrorCode::MissingField:
    case ErrorCode::MissingFile:
    case ErrorCode::IoError:
      return kInputFormat;
    default:
      return kNumericalFailure;
  }
}

std::string error_line(ErrorCode code, const std::string& message) {
  std::string msg = message;
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return "error code=" + std::string(to_string(code)) + " exit=" + std::to_string(exit_code_for(code)) +
         " msg=" + json(msg).dump(-1, ' ', false, json::error_handler_t::replace);
}

KeyValueConfig load_run_config(const CommonOptions& common) {
  if (common.config) return KeyValueConfig::load(*common.config);
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return KeyValueConfig::load(env);
  return {};
}

kf::FilterConfig filter_config_from(const KeyValueConfig& cfg) {
  kf::FilterConfig f;
  f.accel_noise = cfg.get_double("accel_noise", f.accel_noise);
  f.gyro_noise = cfg.get_double("gyro_noise", f.gyro_noise);
  f.accel_bias_walk = cfg.get_double("accel_bias_walk", f.accel_bias_walk);
  f.gyro_bias_walk = cfg.get_double("gyro_bias_walk", f.gyro_bias_walk);
  f.aiding_pos_sigma = cfg.get_double("aiding_pos_sigma", f.aiding_pos_sigma);
  f.aiding_vel_sigma = cfg.get_double("aiding_vel_sigma", f.aiding_vel_sigma);
  f.init_pos_sigma = cfg.get_double("init_pos_sigma", f.init_pos_sigma);
  f.init_vel_sigma = cfg.get_double("init_vel_sigma", f.init_vel_sigma);
  f.init_att_sigma = cfg.get_double("init_att_sigma", f.init_att_sigma);
  f.init_accel_bias_sigma = cfg.get_double("init_accel_bias_sigma", f.init_accel_bias_sigma);
  f.init_gyro_bias_sigma = cfg.get_double("init_gyro_bias_sigma", f.init_gyro_bias_sigma);
  f.innovation_gate = cfg.get_double("innovation_gate", f.innovation_gate);
  f.time_tolerance = cfg.get_double("time_tolerance", f.time_tolerance);
  auto& m = f.mechanization;
  m.earth_rate = cfg.get_bool("earth_rate", m.earth_rate);
  m.transport_rate = cfg.get_bool("transport_rate", m.transport_rate);
  m.max_step_rotation = cfg.get_double("max_step_rotation", m.max_step_rotation);
  if (const auto form = cfg.find("normal_radius_form")) {
    if (*form == "standard") m.earth.normal_radius_form = geodesy::NormalRadiusForm::standard;
    else if (*form == "as_printed") m.earth.normal_radius_form = geodesy::NormalRadiusForm::as_printed;
    else throw Error(ErrorCode::InvalidArgument, "normal_radius_form must be standard or as_printed");
  }
  for (double v : {f.accel_noise, f.gyro_noise, f.accel_bias_walk, f.gyro_bias_walk}) {
    if (v < 0.0) throw Error(ErrorCode::InvalidArgument, "noise densities must be >= 0");
  }
  for (double v : {f.aiding_pos_sigma, f.aiding_vel_sigma, f.init_pos_sigma, f.init_vel_sigma, f.init_att_sigma,
                   f.init_accel_bias_sigma, f.init_gyro_bias_sigma}) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "standard deviations must be > 0");
  }
  return f;
}

adi::AdiConfig adi_config_from(const KeyValueConfig& cfg) {
  adi::AdiConfig a;
  a.window_radius = static_cast<int>(cfg.get_int("adi_window_radius", a.window_radius));
  a.correlation_threshold = cfg.get_double("adi_threshold", a.correlation_threshold);
  a.normalization = export_mode_from(cfg, kitti::AdiExportMode::float32) == kitti::AdiExportMode::float32
                        ? adi::ExportNormalization::raw_float
                        : adi::ExportNormalization::minmax_u8;
  a.validate();
  return a;
}

std::vector<kf::AidingMeasurement> select_aiding(const std::vector<kitti::OxtsRecord>& records, double interval) {
  std::vector<kf::AidingMeasurement> out;
  if (records.size() < 2) return out;
  const double t0 = records.front().timestamp;
  const double slack = 1e-6;
  double next = t0 + interval;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].timestamp + slack < next) continue;
    out.push_back(kitti::oxts_aiding(records[i]));
    while (next <= records[i].timestamp + slack) next += interval;
  }
  return out;
}

PoseTrajectory sequence_poses(const kitti::SequenceManifest& seq, PoseSource source, const kf::FilterConfig& cfg,
                              kitti::ImuTriplet triplet, double aiding_interval, kf::IntegrationResult* integration) {
  if (seq.oxts.empty()) throw Error(ErrorCode::EmptyStream, "sequence has no OXTS records");
  if (!(aiding_interval > 0.0)) throw Error(ErrorCode::InvalidArgument, "aiding interval must be > 0");
  const geodesy::LocalTangentFrame frame(kitti::oxts_position(seq.oxts.front()));
  std::vector<double> times;
  for (const auto& f : seq.frames) times.push_back(f.cloud_time);

  std::vector<ins::NavState> states;
  if (source == PoseSource::oxts) {
    for (const auto& r : seq.oxts) states.push_back(kitti::oxts_nav_state(r));
  } else {
    std::vector<ins::ImuSample> imu;
    for (std::size_t i = 1; i < seq.oxts.size(); ++i) imu.push_back(kitti::oxts_imu(seq.oxts[i], triplet));
    const auto aiding = select_aiding(seq.oxts, aiding_interval);
    kf::IntegrationResult res = kf::run_integration(kitti::oxts_nav_state(seq.oxts.front()), imu, aiding, cfg);
    states = res.corrected;
    if (integration != nullptr) *integration = std::move(res);
  }
  return kf::poses_at(states, frame, times, kPoseClampTolerance);
}

void cmd_poses(const PosesOptions& o, const CommonOptions& common) {
  const KeyValueConfig cfg = load_run_config(common);
  const kf::FilterConfig fc = filter_config_from(cfg);
  const auto seq = kitti::SequenceManifest::scan(o.sequence);
  Staging staging(o.out);

  const auto t0 = std::chrono::steady_clock::now();
  kf::IntegrationResult res;
  const PoseTrajectory poses = sequence_poses(seq, PoseSource::kalman, fc, o.triplet, o.aiding_interval, &res);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const geodesy::LocalTangentFrame frame(kitti::oxts_position(seq.oxts.front()));
  std::vector<double> times;
  for (const auto& f : seq.frames) times.push_back(f.cloud_time);
  kitti::write_poses(poses, staging.dir() / "poses.txt");
  kitti::write_poses(kf::poses_at(res.mechanized, frame, times, kPoseClampTolerance),
                     staging.dir() / "mechanized_poses.txt");

  std::string csv = "timestamp,accepted,nis,dn,de,du,dvn,dve,dvd,sn,se,su,svn,sve,svd\n";
  char buf[64];
  for (const auto& rec : res.innovations) {
    std::snprintf(buf, sizeof buf, "%.9f,%d,%.17g", rec.timestamp, rec.accepted ? 1 : 0, rec.nis);
    csv += buf;
    for (int i = 0; i < kf::kMeas; ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", rec.innovation(i));
      csv += buf;
    }
    for (int i = 0; i < kf::kMeas; ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", rec.sigma(i));
      csv += buf;
    }
    csv += "\n";
  }
  write_file_atomic(staging.dir() / "innovations.csv", csv);

  const auto& x = res.final_state;
  const auto& p = res.final_covariance;
  json s;
  s["command"] = "poses";
  s["frames"] = poses.size();
  s["imu_samples"] = seq.oxts.size() - 1;
  s["updates_accepted"] = res.updates_accepted;
  s["updates_rejected"] = res.updates_rejected;
  s["aiding_unmatched"] = res.aiding_unmatched;
  s["accel_bias"] = {x.accel_bias().x(), x.accel_bias().y(), x.accel_bias().z()};
  s["gyro_bias"] = {x.gyro_bias().x(), x.gyro_bias().y(), x.gyro_bias().z()};
  s["accel_bias_sigma"] = {std::sqrt(p(9, 9)), std::sqrt(p(10, 10)), std::sqrt(p(11, 11))};
  s["gyro_bias_sigma"] = {std::sqrt(p(12, 12)), std::sqrt(p(13, 13)), std::sqrt(p(14, 14))};
  s["imu_triplet"] = o.triplet == kitti::ImuTriplet::xyz ? "xyz" : "flu";
  s["timings"] = {{"integration_s", elapsed}};
  s["warnings"] = config_warnings(cfg);
  write_summary(staging.dir(), s);
  staging.commit();
  log(common, "poses: " + std::to_string(poses.size()) + " frames, " + std::to_string(res.updates_accepted) +
                  " aiding updates");
}

void cmd_adi(const AdiOptions& o, const CommonOptions& common) {
  if (o.poses && o.pose_source) throw Error(ErrorCode::InvalidArgument, "--poses and --pose-source are exclusive");
  const KeyValueConfig cfg = load_run_config(common);
  adi::AdiConfig ac = adi_config_from(cfg);
  if (o.window_radius) ac.window_radius = *o.window_radius;
  if (o.threshold) ac.correlation_threshold = *o.threshold;
  ac.validate();
  const kitti::AdiExportMode mode =
      ac.normalization == adi::ExportNormalization::minmax_u8 ? kitti::AdiExportMode::png8 : o.mode;
  const auto seq = kitti::SequenceManifest::scan(o.sequence);
  const CalibrationSet calib = kitti::read_calibration(seq.calib_dir);
  calib.validate();

  PoseTrajectory poses;
  std::string source_name;
  if (o.poses) {
    poses = kitti::read_poses(*o.poses);
    source_name = "file";
  } else {
    const PoseSource src = o.pose_source.value_or(PoseSource::kalman);
    poses = sequence_poses(seq, src, filter_config_from(cfg), o.triplet, o.aiding_interval);
    source_name = src == PoseSource::kalman ? "kalman" : "oxts";
  }

  Staging staging(o.out);
  fs::create_directories(staging.dir() / "adi");
  const std::size_t n = seq.frames.size();
  std::vector<double> build_ms(n, 0.0), total_ms(n, 0.0);
  std::vector<std::string> frame_warnings(n);
  const int threads = effective_threads(common.threads);
  const auto wall0 = std::chrono::steady_clock::now();
  parallel_frames(n, threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto history = load_history(seq, i);
    const auto t1 = std::chrono::steady_clock::now();
    const auto stack = adi::build_three_channel(history, poses, calib, ac);
    const auto t2 = std::chrono::steady_clock::now();
    kitti::write_adi(stack, staging.dir() / "adi" / frame_name(i, mode == kitti::AdiExportMode::float32 ? ".adnt" : ".png"),
                     mode);
    const auto t3 = std::chrono::steady_clock::now();
    build_ms[i] = std::chrono::duration<double, std::milli>(t2 - t1).count();
    total_ms[i] = std::chrono::duration<double, std::milli>(t3 - t0).count();
    if (stack.channels[2].valid_count() < stack.channels[2].rows() * stack.channels[2].cols() / 100) {
      frame_warnings[i] = "frame " + std::to_string(i) + ": fewer than 1% of pixels hold ADI values";
    }
  });
  const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  json s;
  s["command"] = "adi";
  s["frames"] = n;
  s["pose_source"] = source_name;
  s["threads"] = threads;
  s["normalization"] = mode_name(mode);
  s["window_radius"] = ac.window_radius;
  s["correlation_threshold"] = ac.correlation_threshold;
  s["timings"] = {{"median_build_ms", median(build_ms)},
                  {"median_frame_ms", median(total_ms)},
                  {"wall_s", wall_s},
                  {"throughput_ms_per_frame", n == 0 ? 0.0 : 1000.0 * wall_s / static_cast<double>(n)},
                  {"build_ms", build_ms}};
  auto warnings = config_warnings(cfg);
  for (auto& w : frame_warnings) {
    if (!w.empty()) warnings.push_back(std::move(w));
  }
  s["warnings"] = warnings;
  write_summary(staging.dir(), s);
  staging.commit();
  log(common, "adi: " + std::to_string(n) + " frames, median build " + std::to_string(median(build_ms)) + " ms");
}

void cmd_compare(const CompareOptions& o, const CommonOptions& common) {
  const KeyValueConfig cfg = load_run_config(common);
  const adi::AdiConfig ac = adi_config_from(cfg);
  const kf::FilterConfig fc = filter_config_from(cfg);
  const auto seq = kitti::SequenceManifest::scan(o.sequence);
  const CalibrationSet calib = kitti::read_calibration(seq.calib_dir);
  const PoseTrajectory kalman = sequence_poses(seq, PoseSource::kalman, fc, o.triplet, o.aiding_interval);
  const PoseTrajectory oxts = sequence_poses(seq, PoseSource::oxts, fc, o.triplet, o.aiding_interval);

  Staging staging(o.out);
  const std::size_t n = seq.frames.size();
  std::vector<adi::PoseSourceComparison> results(n);
  parallel_frames(n, effective_threads(common.threads), [&](std::size_t i) {
    const auto history = load_history(seq, i);
    results[i] = adi::compare_pose_sources(history, oxts, kalman, calib, ac);
  });

  std::string csv = "frame,kalman_mean,kalman_p95,oxts_mean,oxts_p95,difference_mean,difference_p95,difference_max\n";
  double sk = 0.0, so = 0.0, sd = 0.0;
  json per_frame = json::array();
  char buf[256];
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = results[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, r.kalman_dispersion.mean,
                  r.kalman_dispersion.p95, r.oxts_dispersion.mean, r.oxts_dispersion.p95, r.difference.mean,
                  r.difference.p95, r.difference.max);
    csv += buf;
    sk += r.kalman_dispersion.mean;
    so += r.oxts_dispersion.mean;
    sd += r.difference.mean;
    per_frame.push_back({{"kalman", stats_json(r.kalman_dispersion)},
                         {"oxts", stats_json(r.oxts_dispersion)},
                         {"difference", stats_json(r.difference)}});
  }
  write_file_atomic(staging.dir() / "compare.csv", csv);
  const double dn = n == 0 ? 1.0 : static_cast<double>(n);
  json s;
  s["command"] = "compare";
  s["frames"] = n;
  s["mean_kalman_dispersion"] = sk / dn;
  s["mean_oxts_dispersion"] = so / dn;
  s["mean_difference"] = sd / dn;
  s["per_frame"] = per_frame;
  s["warnings"] = config_warnings(cfg);
  write_summary(staging.dir(), s);
  staging.commit();
}

void cmd_metrics(const MetricsOptions& o, const CommonOptions& common) {
  const auto preds = png_files(o.pred);
  if (preds.empty()) throw Error(ErrorCode::MissingFile, "no prediction PNGs in " + o.pred.string());

  std::vector<double> all_scores;
  std::vector<std::uint8_t> all_road, all_valid;
  json per_image = json::array();
  std::vector<std::string> warnings;
  for (const auto& p : preds) {
    const fs::path g = o.gt / p.filename();
    if (!fs::exists(g)) throw Error(ErrorCode::MissingFile, "no ground truth for " + p.filename().string());
    const auto scores = read_scores(p);
    metrics::BinaryMap road, valid;
    read_road_gt(g, road, valid);
    const auto r = metrics::max_f_and_ap(scores, road, &valid);
    if (r.single_class) warnings.push_back(p.filename().string() + ": ground truth holds a single class");
    per_image.push_back({{"file", p.filename().string()}, {"max_f", r.max_f}, {"ap", r.average_precision}});
    all_scores.insert(all_scores.end(), scores.data.begin(), scores.data.end());
    all_road.insert(all_road.end(), road.data.begin(), road.data.end());
    all_valid.insert(all_valid.end(), valid.data.begin(), valid.data.end());
  }
  metrics::ScoreMap scores(1, all_scores.size());
  scores.data = std::move(all_scores);
  metrics::BinaryMap road(1, all_road.size()), valid(1, all_valid.size());
  road.data = std::move(all_road);
  valid.data = std::move(all_valid);
  const auto r = metrics::max_f_and_ap(scores, road, &valid);

  std::string report = "SPACE=" + o.space + "\nMaxF=" + pct(r.max_f) + "\nAP=" + pct(r.average_precision) + "\nPRE=" +
                       pct(r.at_best.precision) + "\nREC=" + pct(r.at_best.recall) + "\nFPR=" + pct(r.at_best.fpr) +
                       "\nFNR=" + pct(r.at_best.fnr) + "\n";
  json s;
  s["command"] = "metrics";
  s["images"] = preds.size();
  s["space"] = o.space;
  s["max_f"] = r.max_f;
  s["average_precision"] = r.average_precision;
  s["precision"] = r.at_best.precision;
  s["recall"] = r.at_best.recall;
  s["fpr"] = r.at_best.fpr;
  s["fnr"] = r.at_best.fnr;
  s["threshold"] = r.threshold;
  s["exact_sweep"] = r.exact;
  s["degenerate"] = r.at_best.degenerate;
  s["per_image"] = per_image;

  if (o.depth_pred || o.depth_gt) {
    if (!(o.depth_pred && o.depth_gt)) throw Error(ErrorCode::InvalidArgument, "--depth-pred needs --depth-gt");
    std::vector<double> pv, gv;
    const auto dpreds = png_files(*o.depth_pred);
    for (const auto& p : dpreds) {
      const fs::path g = *o.depth_gt / p.filename();
      if (!fs::exists(g)) throw Error(ErrorCode::MissingFile, "no depth ground truth for " + p.filename().string());
      const auto pd = read_depth_png(p);
      const auto gd = read_depth_png(g);
      if (!pd.same_shape(gd)) throw Error(ErrorCode::ShapeMismatch, p.filename().string() + ": depth sizes differ");
      for (std::size_t i = 0; i < gd.size(); ++i) {
        if (gd.data[i] <= 0.0) continue;
        pv.push_back(pd.data[i]);
        gv.push_back(gd.data[i]);
      }
    }
    const double sl = metrics::silog(pv, gv);
    s["silog"] = sl;
    char buf[64];
    std::snprintf(buf, sizeof buf, "SILog=%.4f\n", sl);
    report += buf;
  }
  s["warnings"] = warnings;

  Staging staging(o.out);
  write_file_atomic(staging.dir() / "report.txt", report);
  write_file_atomic(staging.dir() / "metrics.json", s.dump(2) + "\n");
  write_summary(staging.dir(), {{"command", "metrics"}, {"images", preds.size()}, {"warnings", warnings}});
  staging.commit();
  log(common, report);
}

void cmd_simulate(const SimulateOptions& o, const CommonOptions& common) {
  const KeyValueConfig cfg = KeyValueConfig::load(o.spec);
  const sim::ScenarioSpec spec = sim::ScenarioSpec::from_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const sim::ScenarioData data = sim::generate(spec);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Staging staging(o.out);
  sim::write_sequence(data, spec, staging.dir());
  json s;
  s["command"] = "simulate";
  s["imu_samples"] = data.imu.size();
  s["aiding_fixes"] = data.aiding.size();
  s["frames"] = data.clouds.size();
  s["seed"] = spec.seed;
  s["timings"] = {{"generate_s", elapsed}};
  std::vector<std::string> warnings;
  const std::vector<std::string> known = {
      "trajectory", "duration", "imu_rate", "aiding_rate", "lidar_rate", "seed", "latitude_deg", "longitude_deg",
      "height", "roll_deg", "pitch_deg", "heading_deg", "speed", "turn_radius", "waypoints", "accel_bias",
      "gyro_bias", "accel_noise", "gyro_noise", "aiding_pos_sigma", "aiding_vel_sigma", "lidar_beams",
      "lidar_azimuth_steps", "lidar_min_elevation_deg", "lidar_max_elevation_deg", "lidar_max_range",
      "ground_depth", "image_rows", "image_cols", "focal", "earth_rate", "transport_rate"};
  for (const auto& k : cfg.unknown_keys(known)) {
    if (k.rfind("box", 0) != 0) warnings.push_back("unknown scenario key '" + k + "'");
  }
  s["warnings"] = warnings;
  write_summary(staging.dir(), s);
  staging.commit();
  log(common, "simulate: " + std::to_string(data.clouds.size()) + " frames");
}

void cmd_fuse(const FuseOptions& o, const CommonOptions& common) {
  const auto rgb_bytes = read_file_bytes(o.rgb);
  const auto lidar_bytes = read_file_bytes(o.lidar);
  const Tensor rgb = decode_tensor(rgb_bytes);
  const Tensor lidar = decode_tensor(lidar_bytes);
  const bool wide = rgb_bytes[8] == static_cast<std::uint8_t>(TensorDtype::float64) ||
                    lidar_bytes[8] == static_cast<std::uint8_t>(TensorDtype::float64);
  const Tensor fused = fusion::fuse(rgb, lidar, o.alpha);
  write_tensor(o.out, fused, wide ? TensorDtype::float64 : TensorDtype::float32);
  log(common, "fuse: wrote " + o.out.string());
}

int run(int argc, char** argv) {
  CLI::App app{"adinav: INS/Kalman poses, altitude difference images and evaluation metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions common;
  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, std::string("key = value config; default $") + kConfigEnv);
    sub->add_option("--threads", common.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("-v,--verbose", common.verbosity, "progress on stderr");
  };
  const std::map<std::string, kitti::ImuTriplet> triplets{{"xyz", kitti::ImuTriplet::xyz},
                                                           {"flu", kitti::ImuTriplet::flu}};

  PosesOptions po;
  auto* poses = app.add_subcommand("poses", "mechanization + Kalman filter; writes poses at LiDAR timestamps");
  poses->add_option("--sequence", po.sequence, "KITTI raw drive directory")->required()->check(CLI::ExistingDirectory);
  poses->add_option("--out", po.out, "output directory")->required();
  poses->add_option("--imu-triplet", po.triplet, "OXTS accelerometer/gyro fields")->transform(CLI::CheckedTransformer(triplets));
  poses->add_option("--aiding-interval", po.aiding_interval, "seconds between aiding fixes")->check(CLI::PositiveNumber);
  add_common(poses);

  AdiOptions ao;
  std::string pose_source, adi_format = "float";
  std::string poses_file;
  int radius = 0;
  double threshold = 0.0;
  auto* adi_cmd = app.add_subcommand("adi", "3-channel altitude difference image per frame");
  adi_cmd->add_option("--sequence", ao.sequence, "KITTI raw drive directory")->required()->check(CLI::ExistingDirectory);
  adi_cmd->add_option("--out", ao.out, "output directory")->required();
  auto* pf = adi_cmd->add_option("--poses", poses_file, "poses.txt from the poses command")->check(CLI::ExistingFile);
  auto* ps = adi_cmd->add_option("--pose-source", pose_source, "kalman (default) or oxts")
                 ->check(CLI::IsMember({"kalman", "oxts"}));
  pf->excludes(ps);
  adi_cmd->add_option("--format", adi_format, "float (binary tensor) or png8")->check(CLI::IsMember({"float", "png8"}));
  auto* ro = adi_cmd->add_option("--window-radius", radius, "neighborhood radius [px]")->check(CLI::PositiveNumber);
  auto* to = adi_cmd->add_option("--threshold", threshold, "3D correlation threshold [m]")->check(CLI::PositiveNumber);
  adi_cmd->add_option("--imu-triplet", ao.triplet, "OXTS accelerometer/gyro fields")->transform(CLI::CheckedTransformer(triplets));
  adi_cmd->add_option("--aiding-interval", ao.aiding_interval, "seconds between aiding fixes")->check(CLI::PositiveNumber);
  add_common(adi_cmd);

  CompareOptions co;
  auto* compare = app.add_subcommand("compare", "ADI dispersion with Kalman vs OXTS poses");
  compare->add_option("--sequence", co.sequence, "KITTI raw drive directory")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--out", co.out, "output directory")->required();
  compare->add_option("--imu-triplet", co.triplet, "OXTS accelerometer/gyro fields")->transform(CLI::CheckedTransformer(triplets));
  compare->add_option("--aiding-interval", co.aiding_interval, "seconds between aiding fixes")->check(CLI::PositiveNumber);
  add_common(compare);

  MetricsOptions mo;
  std::string depth_pred, depth_gt;
  auto* metrics_cmd = app.add_subcommand("metrics", "road segmentation and depth metrics");
  metrics_cmd->add_option("--pred", mo.pred, "road score PNGs")->required();
  metrics_cmd->add_option("--gt", mo.gt, "ground truth PNGs (same file names)")->required();
  metrics_cmd->add_option("--out", mo.out, "output directory")->required();
  metrics_cmd->add_option("--depth-pred", depth_pred, "predicted depth PNGs (uint16 / 256 m)");
  metrics_cmd->add_option("--depth-gt", depth_gt, "ground truth depth PNGs");
  metrics_cmd->add_option("--space", mo.space, "label for the image space of the inputs")
      ->check(CLI::IsMember({"perspective", "bev"}));
  add_common(metrics_cmd);

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "write a synthetic KITTI-format drive");
  simulate->add_option("--spec", so.spec, "scenario config")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", so.out, "output directory")->required();
  add_common(simulate);

  FuseOptions fo;
  auto* fuse = app.add_subcommand("fuse", "F_rgb + alpha * F_lidar on tensor files");
  fuse->add_option("--rgb", fo.rgb, "RGB feature tensor")->required();
  fuse->add_option("--lidar", fo.lidar, "LiDAR feature tensor")->required();
  fuse->add_option("--alpha", fo.alpha, "LiDAR weight");
  fuse->add_option("--out", fo.out, "output tensor")->required();
  add_common(fuse);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_line(ErrorCode::InvalidArgument, e.what()) << '\n';
    return kUsage;
  }

  try {
    if (!config_path.empty()) common.config = config_path;
    omp_set_num_threads(effective_threads(common.threads));
    if (*poses) {
      cmd_poses(po, common);
    } else if (*adi_cmd) {
      if (!poses_file.empty()) ao.poses = poses_file;
      if (!pose_source.empty()) ao.pose_source = pose_source == "oxts" ? PoseSource::oxts : PoseSource::kalman;
      ao.mode = adi_format == "png8" ? kitti::AdiExportMode::png8 : kitti::AdiExportMode::float32;
      if (ro->count() > 0) ao.window_radius = radius;
      if (to->count() > 0) ao.threshold = threshold;
      cmd_adi(ao, common);
    } else if (*compare) {
      cmd_compare(co, common);
    } else if (*metrics_cmd) {
      if (!depth_pred.empty()) mo.depth_pred = depth_pred;
      if (!depth_gt.empty()) mo.depth_gt = depth_gt;
      cmd_metrics(mo, common);
    } else if (*simulate) {
      cmd_simulate(so, common);
    } else if (*fuse) {
      cmd_fuse(fo, common);
    }
  } catch (const Error& e) {
    std::cerr << error_line(e.code(), e.what()) << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << error_line(ErrorCode::IoError, e.what()) << '\n';
    return kInputFormat;
  } catch (const std::exception& e) {
    std::cerr << "error code=Internal exit=" << kNumericalFailure << " msg=" << json(std::string(e.what())).dump()
              << '\n';
    return kNumericalFailure;
  }
  return kSuccess;
}

}  // namespace adinav::cli
