#include "adinav/geometry.hpp"

#include <cmath>
#include <string>

namespace adinav {

std::string_view to_string(SensorFrame f) {
  switch (f) {
    case SensorFrame::lidar: return "lidar";
    case SensorFrame::body: return "body";
    case SensorFrame::camera: return "camera";
    case SensorFrame::local_nav: return "local-nav";
  }
  return "unknown";
}

void PointCloud::push_back(const Vec3& p, float r, std::optional<std::uint8_t> label) {
  points.push_back(p);
  reflectance.push_back(r);
  if (label) {
    labels.resize(points.size() - 1, 0);
    labels.push_back(*label);
  }
}

PointCloud apply_transform(const PointCloud& cloud, const FrameTransform& t) {
  if (cloud.frame != t.from) {
    throw Error(ErrorCode::FrameMismatch, "cloud is in the " + std::string(to_string(cloud.frame)) +
                                              " frame, transform expects " + std::string(to_string(t.from)));
  }
  PointCloud out;
  out.points.resize(cloud.points.size());
  const Mat3& r = t.transform.rotation;
  const Vec3& tr = t.transform.translation;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) out.points[i] = r * cloud.points[i] + tr;
  out.reflectance = cloud.reflectance;
  out.labels = cloud.labels;
  out.frame = t.to;
  out.timestamp = cloud.timestamp;
  return out;
}

Matrix34 CalibrationSet::lidar_projection() const {
  return projection * rect * lidar_to_camera.matrix();
}

CalibrationSet CalibrationSet::composed(const RigidTransform& a_to_lidar) const {
  CalibrationSet out = *this;
  out.lidar_to_camera = lidar_to_camera * a_to_lidar;
  return out;
}

void CalibrationSet::validate() const {
  if (!(projection(0, 0) > 0.0 && projection(1, 1) > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "projection matrix focal entries must be positive");
  }
  const Mat3 r = rect.block<3, 3>(0, 0);
  if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 || r.determinant() < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "rectification block is not a rotation");
  }
  if (rows == 0 || cols == 0) throw Error(ErrorCode::InvalidArgument, "image size is empty");
}

namespace {

std::optional<Projection> project_with(const Matrix34& m, const Vec3& p, std::size_t rows, std::size_t cols,
                                       double min_depth) {
  const Vec3 y = m.block<3, 3>(0, 0) * p + m.col(3);
  const double depth = y.z();
  if (!(depth > min_depth)) return std::nullopt;
  const double u = y.x() / depth;
  const double v = y.y() / depth;
  if (!(u >= 0.0 && u < static_cast<double>(cols) && v >= 0.0 && v < static_cast<double>(rows))) {
    return std::nullopt;
  }
  return Projection{u, v, depth};
}

}  // namespace

std::optional<Projection> project_point(const Eigen::Vector4d& x, const CalibrationSet& calib, double min_depth) {
  if (!(x.w() > 0.0)) return std::nullopt;
  const Vec3 p = x.head<3>() / x.w();
  return project_with(calib.lidar_projection(), p, calib.rows, calib.cols, min_depth);
}

SparseDepthImage::SparseDepthImage(std::size_t rows, std::size_t cols) : index_(rows, cols, -1) {}

void SparseDepthImage::offer(std::size_t r, std::size_t c, const DepthSample& s) {
  auto& slot = index_(r, c);
  if (slot < 0) {
    slot = static_cast<std::int32_t>(samples_.size());
    samples_.push_back(s);
    pixels_.push_back(static_cast<std::uint32_t>(r * index_.cols + c));
    ++filled_;
  } else if (s.depth < samples_[static_cast<std::size_t>(slot)].depth) {
    samples_[static_cast<std::size_t>(slot)] = s;
  }
}

double SparseDepthImage::fill_fraction() const {
  return index_.size() == 0 ? 0.0 : static_cast<double>(filled_) / static_cast<double>(index_.size());
}

SparseDepthImage rasterize(const PointCloud& cloud, const CalibrationSet& calib, double min_depth) {
  if (cloud.frame != SensorFrame::lidar) {
    throw Error(ErrorCode::FrameMismatch,
                "rasterize expects a lidar-frame cloud, got " + std::string(to_string(cloud.frame)));
  }
  SparseDepthImage image(calib.rows, calib.cols);
  const Matrix34 m = calib.lidar_projection();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const auto proj = project_with(m, p, calib.rows, calib.cols, min_depth);
    if (!proj) continue;
    const auto r = static_cast<std::size_t>(proj->v);
    const auto c = static_cast<std::size_t>(proj->u);
    image.offer(r, c, DepthSample{proj->depth, proj->u, proj->v, p, static_cast<std::int32_t>(i)});
  }
  return image;
}

SparseDepthImage rasterize(const PointCloud& cloud, const RigidTransform& motion, const CalibrationSet& calib,
                           double min_depth) {
  if (cloud.frame != SensorFrame::lidar) {
    throw Error(ErrorCode::FrameMismatch,
                "rasterize expects a lidar-frame cloud, got " + std::string(to_string(cloud.frame)));
  }
  SparseDepthImage image(calib.rows, calib.cols);
  const Matrix34 m = calib.lidar_projection();
  const Mat3& r = motion.rotation;
  const Vec3& t = motion.translation;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3 p = r * cloud.points[i] + t;
    const auto proj = project_with(m, p, calib.rows, calib.cols, min_depth);
    if (!proj) continue;
    const auto row = static_cast<std::size_t>(proj->v);
    const auto col = static_cast<std::size_t>(proj->u);
    image.offer(row, col, DepthSample{proj->depth, proj->u, proj->v, p, static_cast<std::int32_t>(i)});
  }
  return image;
}

}  // namespace adinav
