#ifndef ADINAV_FUSION_HPP
#define ADINAV_FUSION_HPP

// Network-side arithmetic that does not need a learning framework: the
// single-layer feature fusion and the weighted multi-task loss.

#include "adinav/tensor.hpp"

#include <span>
#include <string>

namespace adinav::fusion {

/// C x H x W activations. Any tensor shape is accepted by fuse(); the 3-D
/// layout is what the CLI reads and writes.
using FeatureMap = Tensor;

inline constexpr double kDefaultLidarWeight = 1.0;

/// F_fuse = F_rgb + alpha * F_lidar, elementwise. Throws ShapeMismatch.
FeatureMap fuse(const FeatureMap& rgb, const FeatureMap& lidar, double alpha = kDefaultLidarWeight);

struct TaskLoss {
  std::string task;
  double loss = 0.0;    // >= 0
  double weight = 1.0;  // > 0; untuned placeholder default
};

/// sum_i weight_i * loss_i. Throws EmptyTaskSet, InvalidArgument.
double combine_losses(std::span<const TaskLoss> losses);

}  // namespace adinav::fusion

#endif  // ADINAV_FUSION_HPP
