#include "adinav/fusion.hpp"

#include <cmath>

namespace adinav::fusion {

FeatureMap fuse(const FeatureMap& rgb, const FeatureMap& lidar, double alpha) {
  if (rgb.shape != lidar.shape || rgb.data.size() != lidar.data.size()) {
    throw Error(ErrorCode::ShapeMismatch, "fusion inputs differ in shape");
  }
  // alpha == 0 returns F_rgb untouched (keeps -0.0 and every other bit).
  if (alpha == 0.0) return rgb;
  FeatureMap out = rgb;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += alpha * lidar.data[i];
  return out;
}

double combine_losses(std::span<const TaskLoss> losses) {
  if (losses.empty()) throw Error(ErrorCode::EmptyTaskSet, "no task losses given");
  double total = 0.0;
  for (const auto& l : losses) {
    if (!(std::isfinite(l.weight) && l.weight > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "task '" + l.task + "' has a non-positive weight");
    }
    if (!(std::isfinite(l.loss) && l.loss >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "task '" + l.task + "' has an invalid loss");
    }
    total += l.weight * l.loss;
  }
  return total;
}

}  // namespace adinav::fusion
