#include "adinav/adi.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace adinav::adi {

void AdiConfig::validate() const {
  if (window_radius < 1) throw Error(ErrorCode::InvalidArgument, "ADI window radius must be >= 1");
  if (!(correlation_threshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ADI correlation threshold must be > 0");
  }
}

std::size_t AdiImage::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.data.begin(), values_.data.end(), [](double v) { return !std::isnan(v); }));
}

namespace {

struct Offset {
  long dy;
  long dx;
  double distance;  // [px]
};

// Window offsets in row-major order, matching the reference kernel.
std::vector<Offset> window_offsets(long radius) {
  std::vector<Offset> out;
  for (long dy = -radius; dy <= radius; ++dy) {
    for (long dx = -radius; dx <= radius; ++dx) {
      if (dx == 0 && dy == 0) continue;
      out.push_back({dy, dx, std::sqrt(static_cast<double>(dx * dx + dy * dy))});
    }
  }
  return out;
}

}  // namespace

AdiImage compute_adi(const SparseDepthImage& depth, const AdiConfig& cfg) {
  cfg.validate();
  if (depth.filled() == 0) throw Error(ErrorCode::NoValidPixels, "depth image has no valid pixels");

  const long rows = static_cast<long>(depth.rows());
  const long cols = static_cast<long>(depth.cols());
  const long radius = cfg.window_radius;
  const double thr_sq = cfg.correlation_threshold * cfg.correlation_threshold;
  const std::vector<Offset> offsets = window_offsets(radius);
  const DepthSample* samples = depth.samples().data();

  AdiImage out(depth.rows(), depth.cols());
  double* values = out.values().data.data();
  const std::uint32_t* pixels = depth.slot_pixels().data();
  const auto slots = static_cast<long>(depth.samples().size());

#pragma omp parallel for schedule(static)
  for (long i = 0; i < slots; ++i) {
    const long y = static_cast<long>(pixels[i]) / cols;
    const long x = static_cast<long>(pixels[i]) % cols;
    const DepthSample& center = samples[i];
    const bool interior = y >= radius && y < rows - radius && x >= radius && x < cols - radius;
    double sum = 0.0;
    long used = 0;
    for (const Offset& o : offsets) {
      const long ny = y + o.dy, nx = x + o.dx;
      if (!interior && (ny < 0 || ny >= rows || nx < 0 || nx >= cols)) continue;
      const std::int32_t ni = depth.slot(ny, nx);
      if (ni < 0) continue;
      const DepthSample& n = samples[ni];
      if ((n.point - center.point).squaredNorm() > thr_sq) continue;
      sum += std::abs(center.point.z() - n.point.z()) / o.distance;
      ++used;
    }
    if (used > 0) values[pixels[i]] = sum / static_cast<double>(used);
  }
  return out;
}

RigidTransform relative_lidar_motion(const RigidTransform& pose_current, const RigidTransform& pose_past,
                                     const CalibrationSet& calib) {
  if (pose_current.rotation == pose_past.rotation && pose_current.translation == pose_past.translation) {
    return RigidTransform::identity();
  }
  return calib.body_to_lidar * pose_current.inverse() * pose_past * calib.body_to_lidar.inverse();
}

std::array<PointCloud, 3> aggregate_clouds(std::span<const PointCloud> history, const PoseTrajectory& poses,
                                           const CalibrationSet& calib, double pose_tolerance) {
  if (history.empty() || history.size() > 3) {
    throw Error(ErrorCode::InvalidArgument, "aggregation needs 1 to 3 clouds");
  }
  for (const auto& c : history) {
    if (c.frame != SensorFrame::lidar) throw Error(ErrorCode::FrameMismatch, "aggregation expects lidar-frame clouds");
  }
  const PointCloud& current = history.back();
  const RigidTransform pose_now = poses.at(current.timestamp, pose_tolerance);

  std::vector<PointCloud> moved;
  for (std::size_t i = 0; i + 1 < history.size(); ++i) {
    const RigidTransform past = poses.at(history[i].timestamp, pose_tolerance);
    const RigidTransform rel = relative_lidar_motion(pose_now, past, calib);
    PointCloud c = apply_transform(history[i], {rel, SensorFrame::lidar, SensorFrame::lidar});
    c.timestamp = history[i].timestamp;
    moved.push_back(std::move(c));
  }

  std::array<PointCloud, 3> out;
  out[2] = current;
  switch (moved.size()) {
    case 2:
      out[0] = std::move(moved[0]);
      out[1] = std::move(moved[1]);
      break;
    case 1:
      out[1] = std::move(moved[0]);
      out[0] = out[1];
      break;
    default:
      out[0] = current;
      out[1] = current;
  }
  return out;
}

std::array<SparseDepthImage, 3> rasterize_channels(const std::array<PointCloud, 3>& clouds,
                                                   const CalibrationSet& calib, int history) {
  std::array<SparseDepthImage, 3> out;
  out[2] = rasterize(clouds[2], calib);
  out[1] = history >= 2 ? rasterize(clouds[1], calib) : out[2];
  out[0] = history >= 3 ? rasterize(clouds[0], calib) : out[1];
  return out;
}

ThreeChannelAdi build_three_channel(std::span<const PointCloud> history, const PoseTrajectory& poses,
                                    const CalibrationSet& calib, const AdiConfig& cfg, double pose_tolerance) {
  if (history.empty() || history.size() > 3) {
    throw Error(ErrorCode::InvalidArgument, "aggregation needs 1 to 3 clouds");
  }
  for (const auto& c : history) {
    if (c.frame != SensorFrame::lidar) throw Error(ErrorCode::FrameMismatch, "aggregation expects lidar-frame clouds");
  }
  const int n = static_cast<int>(history.size());
  const RigidTransform pose_now = poses.at(history.back().timestamp, pose_tolerance);

  // Channel k holds history[n - 3 + k]; missing ones replicate the oldest.
  std::array<SparseDepthImage, 3> depth;
  for (int k = 3 - n; k < 3; ++k) {
    const PointCloud& c = history[static_cast<std::size_t>(n - 3 + k)];
    if (k == 2) {
      depth[k] = rasterize(c, calib);
    } else {
      const RigidTransform past = poses.at(c.timestamp, pose_tolerance);
      depth[k] = rasterize(c, relative_lidar_motion(pose_now, past, calib), calib);
    }
  }

  ThreeChannelAdi out;
  out.timestamp = history.back().timestamp;
  out.history = n;
  for (int k = 3 - n; k < 3; ++k) out.channels[k] = compute_adi(depth[k], cfg);
  for (int k = 2 - n; k >= 0; --k) out.channels[k] = out.channels[k + 1];
  return out;
}

Grid<double> channel_dispersion(const ThreeChannelAdi& adi) {
  const auto& c0 = adi.channels[0];
  Grid<double> out(c0.rows(), c0.cols(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    int n = 0;
    for (const auto& ch : adi.channels) {
      const double v = ch.values().data[i];
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++n;
    }
    if (n >= 2) out.data[i] = hi - lo;
  }
  return out;
}

DispersionStats summarize(const Grid<double>& grid, const Grid<std::uint8_t>* mask) {
  std::vector<double> vals;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (mask != nullptr && mask->data[i] == 0) continue;
    if (std::isfinite(grid.data[i])) vals.push_back(grid.data[i]);
  }
  DispersionStats s;
  s.pixels = vals.size();
  if (vals.empty()) return s;
  double sum = 0.0;
  for (double v : vals) sum += v;
  s.mean = sum / static_cast<double>(vals.size());
  s.max = *std::max_element(vals.begin(), vals.end());
  const auto k = static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(vals.size() - 1)));
  std::nth_element(vals.begin(), vals.begin() + static_cast<long>(k), vals.end());
  s.p95 = vals[k];
  return s;
}

PoseSourceComparison compare_pose_sources(std::span<const PointCloud> history, const PoseTrajectory& oxts_poses,
                                          const PoseTrajectory& kalman_poses, const CalibrationSet& calib,
                                          const AdiConfig& cfg, const Grid<std::uint8_t>* static_mask) {
  PoseSourceComparison out;
  out.kalman = build_three_channel(history, kalman_poses, calib, cfg);
  out.oxts = build_three_channel(history, oxts_poses, calib, cfg);
  const Grid<double> dk = channel_dispersion(out.kalman);
  const Grid<double> dox = channel_dispersion(out.oxts);
  out.kalman_dispersion = summarize(dk, static_mask);
  out.oxts_dispersion = summarize(dox, static_mask);
  Grid<double> diff(dk.rows, dk.cols, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    if (std::isfinite(dk.data[i]) && std::isfinite(dox.data[i])) diff.data[i] = std::abs(dk.data[i] - dox.data[i]);
  }
  out.difference = summarize(diff, static_mask);
  return out;
}

Grid<std::uint8_t> dynamic_pixel_mask(const std::array<SparseDepthImage, 3>& depth,
                                      const std::array<PointCloud, 3>& clouds) {
  const std::size_t rows = depth[0].rows(), cols = depth[0].cols();
  Grid<std::uint8_t> out(rows, cols, 0);
  for (int k = 0; k < 3; ++k) {
    if (depth[k].rows() != rows || depth[k].cols() != cols) {
      throw Error(ErrorCode::ShapeMismatch, "dynamic mask: channel shapes differ");
    }
    const auto& labels = clouds[k].labels;
    if (labels.empty()) continue;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (!depth[k].valid(r, c)) continue;
        const auto src = static_cast<std::size_t>(depth[k].sample(r, c).source);
        if (src < labels.size() && labels[src] != 0) out(r, c) = 1;
      }
    }
  }
  return out;
}

CellDisagreement disagreement_mask(const ThreeChannelAdi& adi, const DisagreementConfig& cfg) {
  if (cfg.cell < 1) throw Error(ErrorCode::InvalidArgument, "disagreement cell must be >= 1");
  if (!(cfg.threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "disagreement threshold must be >= 0");
  const std::size_t rows = adi.channels[0].rows(), cols = adi.channels[0].cols();
  for (const auto& ch : adi.channels) {
    if (ch.rows() != rows || ch.cols() != cols) throw Error(ErrorCode::ShapeMismatch, "ADI channel shapes differ");
  }
  const auto cell = static_cast<std::size_t>(cfg.cell);
  const std::size_t gr = (rows + cell - 1) / cell, gc = (cols + cell - 1) / cell;

  std::vector<double> sum(gr * gc * 3, 0.0);
  std::vector<std::size_t> count(gr * gc * 3, 0);
  for (int k = 0; k < 3; ++k) {
    const Grid<double>& v = adi.channels[k].values();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double x = v(r, c);
        if (std::isnan(x)) continue;
        const std::size_t i = ((r / cell) * gc + c / cell) * 3 + k;
        sum[i] += x;
        ++count[i];
      }
    }
  }

  CellDisagreement out;
  out.cell = cfg.cell;
  out.defined = Grid<std::uint8_t>(gr, gc, 0);
  out.disagree = Grid<std::uint8_t>(gr, gc, 0);
  out.spread = Grid<double>(gr, gc, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < gr * gc; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    int have = 0;
    for (int k = 0; k < 3; ++k) {
      if (count[i * 3 + k] == 0) continue;
      const double m = sum[i * 3 + k] / static_cast<double>(count[i * 3 + k]);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
      ++have;
    }
    if (have < 2) continue;
    out.defined.data[i] = 1;
    out.spread.data[i] = hi - lo;
    out.disagree.data[i] = hi - lo > cfg.threshold ? 1 : 0;
  }
  return out;
}

Grid<std::uint8_t> cell_any(const Grid<std::uint8_t>& pixels, int cell) {
  if (cell < 1) throw Error(ErrorCode::InvalidArgument, "cell must be >= 1");
  const auto n = static_cast<std::size_t>(cell);
  Grid<std::uint8_t> out((pixels.rows + n - 1) / n, (pixels.cols + n - 1) / n, 0);
  for (std::size_t r = 0; r < pixels.rows; ++r) {
    for (std::size_t c = 0; c < pixels.cols; ++c) {
      if (pixels(r, c) != 0) out(r / n, c / n) = 1;
    }
  }
  return out;
}

double mask_iou(const Grid<std::uint8_t>& a, const Grid<std::uint8_t>& b, const Grid<std::uint8_t>* domain) {
  if (!a.same_shape(b) || (domain != nullptr && !a.same_shape(*domain))) {
    throw Error(ErrorCode::ShapeMismatch, "mask_iou: shapes differ");
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (domain != nullptr && domain->data[i] == 0) continue;
    const bool x = a.data[i] != 0, y = b.data[i] != 0;
    inter += x && y ? 1 : 0;
    uni += x || y ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace adinav::adi
