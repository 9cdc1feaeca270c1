#ifndef ADINAV_ADI_HPP
#define ADINAV_ADI_HPP

// Altitude Difference Images (ADI) and their three-timestep stack.
//
// For each filled pixel (x, y) with elevation Z:
//
//   V(x, y) = 1/M * sum_n |Z(x, y) - Z(n)| / |n - (x, y)|
//
// over the filled pixels n of a (2r+1)^2 window (center excluded) whose 3D
// source points lie within the correlation threshold of the center point.
// M is the number of neighbors used; M = 0 leaves the pixel empty. The
// distance |n - (x, y)| is measured in pixels.

#include "adinav/geometry.hpp"
#include "adinav/pose.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <span>

namespace adinav::adi {

enum class ExportNormalization { raw_float, minmax_u8 };

struct AdiConfig {
  int window_radius = 2;               // [px]; 2 gives a 5x5 window
  double correlation_threshold = 1.0;  // [m]
  ExportNormalization normalization = ExportNormalization::raw_float;

  /// Throws InvalidArgument for radius < 1 or threshold <= 0.
  void validate() const;
};

/// Dense grid of V values; NaN marks pixels without data.
class AdiImage {
 public:
  static constexpr double kNoData = std::numeric_limits<double>::quiet_NaN();

  AdiImage() = default;
  AdiImage(std::size_t rows, std::size_t cols) : values_(rows, cols, kNoData) {}

  std::size_t rows() const { return values_.rows; }
  std::size_t cols() const { return values_.cols; }
  bool valid(std::size_t r, std::size_t c) const { return !std::isnan(values_(r, c)); }
  double operator()(std::size_t r, std::size_t c) const { return values_(r, c); }
  double& operator()(std::size_t r, std::size_t c) { return values_(r, c); }
  const Grid<double>& values() const { return values_; }
  Grid<double>& values() { return values_; }
  std::size_t valid_count() const;

 private:
  Grid<double> values_;
};

/// Channel order: 0 = t-2, 1 = t-1, 2 = t.
struct ThreeChannelAdi {
  std::array<AdiImage, 3> channels;
  double timestamp = 0.0;
  /// Number of distinct source clouds behind the channels (1..3); channels
  /// without their own cloud replicate the newest available one.
  int history = 3;
};

/// OpenMP kernel, parallel over image rows. Throws NoValidPixels when the
/// depth image is empty.
AdiImage compute_adi(const SparseDepthImage& depth, const AdiConfig& cfg);

/// Single-threaded reference kernel; bitwise identical to compute_adi.
AdiImage compute_adi_serial(const SparseDepthImage& depth, const AdiConfig& cfg);

/// Relative transform taking LiDAR points at `past` into the LiDAR frame at
/// `current`: T_lidar<-body * pose(current)^-1 * pose(past) * T_body<-lidar.
RigidTransform relative_lidar_motion(const RigidTransform& pose_current, const RigidTransform& pose_past,
                                     const CalibrationSet& calib);

/// Expresses the history clouds (oldest first, 1..3 entries, the last being
/// time t) in the LiDAR frame at t. Returns channel order (t-2, t-1, t);
/// missing older clouds replicate the oldest available result. The current
/// cloud is returned untransformed. Throws PoseGap.
std::array<PointCloud, 3> aggregate_clouds(std::span<const PointCloud> history, const PoseTrajectory& poses,
                                           const CalibrationSet& calib, double pose_tolerance = 1e-3);

/// Depth images for the three channels (after aggregation).
std::array<SparseDepthImage, 3> rasterize_channels(const std::array<PointCloud, 3>& clouds,
                                                   const CalibrationSet& calib, int history);

ThreeChannelAdi build_three_channel(std::span<const PointCloud> history, const PoseTrajectory& poses,
                                    const CalibrationSet& calib, const AdiConfig& cfg,
                                    double pose_tolerance = 1e-3);

/// Cross-channel dispersion per pixel: max - min of V over the channels that
/// hold data there; NaN when fewer than two channels do.
Grid<double> channel_dispersion(const ThreeChannelAdi& adi);

struct DispersionStats {
  std::size_t pixels = 0;  // pixels with a defined dispersion
  double mean = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

/// Statistics over the finite entries of `grid`, optionally restricted to
/// mask != 0.
DispersionStats summarize(const Grid<double>& grid, const Grid<std::uint8_t>* mask = nullptr);

struct PoseSourceComparison {
  ThreeChannelAdi kalman;
  ThreeChannelAdi oxts;
  DispersionStats kalman_dispersion;
  DispersionStats oxts_dispersion;
  /// |dispersion(kalman) - dispersion(oxts)| on pixels where both are defined.
  DispersionStats difference;
};

/// Builds the stack from both pose sources and reports their cross-channel
/// dispersion. `static_mask` (optional) restricts the statistics.
PoseSourceComparison compare_pose_sources(std::span<const PointCloud> history, const PoseTrajectory& oxts_poses,
                                          const PoseTrajectory& kalman_poses, const CalibrationSet& calib,
                                          const AdiConfig& cfg, const Grid<std::uint8_t>* static_mask = nullptr);

/// Pixels whose source point, in any channel, carries a dynamic label.
/// Channels without labels contribute nothing.
Grid<std::uint8_t> dynamic_pixel_mask(const std::array<SparseDepthImage, 3>& depth,
                                      const std::array<PointCloud, 3>& clouds);

struct DisagreementConfig {
  int cell = 8;              // [px] square cell edge
  double threshold = 1e-6;   // on max - min of the per-channel cell means
};

/// Cell-level cross-channel disagreement. Each channel contributes the mean V
/// of its valid pixels inside the cell; a cell is defined when at least two
/// channels contribute and disagrees when their means spread by more than
/// the threshold. Grids are ceil(rows / cell) x ceil(cols / cell).
struct CellDisagreement {
  int cell = 8;
  Grid<std::uint8_t> defined;
  Grid<std::uint8_t> disagree;
  Grid<double> spread;  // NaN where undefined
};

/// Throws InvalidArgument for cell < 1 or a negative threshold.
CellDisagreement disagreement_mask(const ThreeChannelAdi& adi, const DisagreementConfig& cfg = {});

/// A cell is set when any of its pixels is set.
Grid<std::uint8_t> cell_any(const Grid<std::uint8_t>& pixels, int cell);

/// Intersection over union of two masks, optionally restricted to domain != 0.
/// Returns 0 when the union is empty. Throws ShapeMismatch.
double mask_iou(const Grid<std::uint8_t>& a, const Grid<std::uint8_t>& b, const Grid<std::uint8_t>* domain = nullptr);

}  // namespace adinav::adi

#endif  // ADINAV_ADI_HPP
