#include "adinav/pose.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <string>

namespace adinav {

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  return {m.block<3, 3>(0, 0), m.block<3, 1>(0, 3)};
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = rotation;
  m.block<3, 1>(0, 3) = translation;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

PoseTrajectory::PoseTrajectory(std::vector<TimedPose> poses) : poses_(std::move(poses)) {
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    if (!(poses_[i].timestamp > poses_[i - 1].timestamp)) {
      throw Error(ErrorCode::NonMonotonicTime, "pose timestamps must increase strictly");
    }
  }
}

void PoseTrajectory::push_back(const TimedPose& p) {
  if (!poses_.empty() && !(p.timestamp > poses_.back().timestamp)) {
    throw Error(ErrorCode::NonMonotonicTime, "pose timestamps must increase strictly");
  }
  poses_.push_back(p);
}

RigidTransform PoseTrajectory::at(double timestamp, double tolerance) const {
  if (poses_.empty()) throw Error(ErrorCode::PoseGap, "empty pose trajectory");
  const auto& first = poses_.front();
  const auto& last = poses_.back();
  if (timestamp <= first.timestamp) {
    if (first.timestamp - timestamp > tolerance) {
      throw Error(ErrorCode::PoseGap, "timestamp " + std::to_string(timestamp) + " precedes trajectory");
    }
    return first.pose;
  }
  if (timestamp >= last.timestamp) {
    if (timestamp - last.timestamp > tolerance) {
      throw Error(ErrorCode::PoseGap, "timestamp " + std::to_string(timestamp) + " follows trajectory");
    }
    return last.pose;
  }
  const auto hi = std::upper_bound(poses_.begin(), poses_.end(), timestamp,
                                   [](double t, const TimedPose& p) { return t < p.timestamp; });
  const auto lo = hi - 1;
  const double s = (timestamp - lo->timestamp) / (hi->timestamp - lo->timestamp);
  if (s == 0.0) return lo->pose;
  const Eigen::Quaterniond qa(lo->pose.rotation);
  const Eigen::Quaterniond qb(hi->pose.rotation);
  RigidTransform out;
  out.rotation = qa.slerp(s, qb).toRotationMatrix();
  out.translation = (1.0 - s) * lo->pose.translation + s * hi->pose.translation;
  return out;
}

}  // namespace adinav
