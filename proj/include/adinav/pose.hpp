#ifndef ADINAV_POSE_HPP
#define ADINAV_POSE_HPP

#include "adinav/common.hpp"

#include <vector>

namespace adinav {

/// p' = R p + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_matrix(const Mat4& m);

  Mat4 matrix() const;
  RigidTransform inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// (a * b)(p) = a(b(p)).
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  }
};

struct TimedPose {
  double timestamp = 0.0;
  RigidTransform pose;  // body expressed in the local navigation frame
};

/// Time-ordered body-in-local-nav poses.
class PoseTrajectory {
 public:
  PoseTrajectory() = default;
  explicit PoseTrajectory(std::vector<TimedPose> poses);

  void push_back(const TimedPose& p);
  const std::vector<TimedPose>& poses() const { return poses_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  const TimedPose& operator[](std::size_t i) const { return poses_[i]; }

  /// Linear translation / slerp rotation between the bracketing poses.
  /// Timestamps up to `tolerance` outside the covered span clamp to the end
  /// pose; anything further throws PoseGap.
  RigidTransform at(double timestamp, double tolerance = 1e-6) const;

 private:
  std::vector<TimedPose> poses_;
};

}  // namespace adinav

#endif  // ADINAV_POSE_HPP
