#ifndef ADINAV_GEOMETRY_HPP
#define ADINAV_GEOMETRY_HPP

// LiDAR point clouds, sensor calibration and projection onto the rectified
// image plane:  y = P_rect R_rect T_lidar^cam x.

#include "adinav/common.hpp"
#include "adinav/pose.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace adinav {

enum class SensorFrame { lidar, body, camera, local_nav };

std::string_view to_string(SensorFrame f);

struct PointCloud {
  std::vector<Vec3> points;          // [m]
  std::vector<float> reflectance;    // same length as points
  /// Optional per-point labels (0 static, 1 dynamic) carried from simulation;
  /// empty when unknown.
  std::vector<std::uint8_t> labels;
  SensorFrame frame = SensorFrame::lidar;
  double timestamp = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void push_back(const Vec3& p, float r, std::optional<std::uint8_t> label = std::nullopt);
};

/// Rigid transform annotated with the frames it maps between.
struct FrameTransform {
  RigidTransform transform;
  SensorFrame from = SensorFrame::lidar;
  SensorFrame to = SensorFrame::lidar;
};

/// p' = R p + t for every point; reflectance and labels preserved.
/// Throws FrameMismatch when cloud.frame != t.from.
PointCloud apply_transform(const PointCloud& cloud, const FrameTransform& t);

using Matrix34 = Eigen::Matrix<double, 3, 4>;

struct CalibrationSet {
  RigidTransform lidar_to_camera;          // T_lidar^cam (reference camera 0)
  Mat4 rect = Mat4::Identity();            // R_rect, rotation embedded, [3,3] = 1
  Matrix34 projection = Matrix34::Zero();  // P_rect [px]
  /// Navigation body frame (forward-right-down) to LiDAR.
  RigidTransform body_to_lidar;
  std::size_t rows = 0;  // image height [px]
  std::size_t cols = 0;  // image width [px]

  /// P_rect R_rect T_lidar^cam.
  Matrix34 lidar_projection() const;
  /// Calibration for a cloud expressed in another frame a, given a -> lidar.
  CalibrationSet composed(const RigidTransform& a_to_lidar) const;
  /// Throws InvalidArgument when focal entries are not positive or the
  /// rectification block is not a rotation.
  void validate() const;
};

inline constexpr double kDefaultMinDepth = 0.1;  // [m]

struct Projection {
  double u = 0.0;      // column [px]
  double v = 0.0;      // row [px]
  double depth = 0.0;  // [m]
};

/// Projects a homogeneous LiDAR point. Returns nullopt (culled) when the depth
/// is <= min_depth or the pixel falls outside the image.
std::optional<Projection> project_point(const Eigen::Vector4d& x, const CalibrationSet& calib,
                                        double min_depth = kDefaultMinDepth);

struct DepthSample {
  double depth = 0.0;          // [m]
  double u = 0.0;              // sub-pixel position of the source point
  double v = 0.0;
  Vec3 point = Vec3::Zero();   // source point in the rasterized cloud's frame
  std::int32_t source = -1;    // index into the rasterized cloud
};

/// Sparse H x W depth image; each filled pixel keeps the nearest point that
/// landed on it, including its 3D position (point.z() is the elevation used
/// by the altitude-difference image).
class SparseDepthImage {
 public:
  static constexpr double kNoData = 0.0;

  SparseDepthImage() = default;
  SparseDepthImage(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return index_.rows; }
  std::size_t cols() const { return index_.cols; }

  bool valid(std::size_t r, std::size_t c) const { return index_(r, c) >= 0; }
  double depth(std::size_t r, std::size_t c) const {
    const auto i = index_(r, c);
    return i < 0 ? kNoData : samples_[static_cast<std::size_t>(i)].depth;
  }
  const DepthSample& sample(std::size_t r, std::size_t c) const {
    return samples_[static_cast<std::size_t>(index_(r, c))];
  }
  std::int32_t slot(std::size_t r, std::size_t c) const { return index_(r, c); }
  const std::vector<DepthSample>& samples() const { return samples_; }
  /// Row-major pixel index (r * cols + c) of each slot.
  const std::vector<std::uint32_t>& slot_pixels() const { return pixels_; }

  /// Keeps the sample if the pixel is empty or the new depth is smaller.
  void offer(std::size_t r, std::size_t c, const DepthSample& s);

  std::size_t filled() const { return filled_; }
  double fill_fraction() const;
  /// Fewer than 1% of the pixels filled; usually a calibration mismatch.
  bool low_fill_warning() const { return fill_fraction() < 0.01; }

 private:
  Grid<std::int32_t> index_;
  std::vector<DepthSample> samples_;
  std::vector<std::uint32_t> pixels_;
  std::size_t filled_ = 0;
};

/// Projects every point of a LiDAR-frame cloud onto the image (floor of
/// (u, v)); collisions keep the nearest point. Throws FrameMismatch.
SparseDepthImage rasterize(const PointCloud& cloud, const CalibrationSet& calib,
                           double min_depth = kDefaultMinDepth);

/// Same as rasterizing apply_transform(cloud, motion) without building the
/// moved cloud; samples hold the moved points.
SparseDepthImage rasterize(const PointCloud& cloud, const RigidTransform& motion, const CalibrationSet& calib,
                           double min_depth = kDefaultMinDepth);

}  // namespace adinav

#endif  // ADINAV_GEOMETRY_HPP
