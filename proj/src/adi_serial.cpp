#include "adinav/adi.hpp"

#include <cmath>

namespace adinav::adi {

AdiImage compute_adi_serial(const SparseDepthImage& depth, const AdiConfig& cfg) {
  cfg.validate();
  if (depth.filled() == 0) throw Error(ErrorCode::NoValidPixels, "depth image has no valid pixels");

  const auto rows = static_cast<long>(depth.rows());
  const auto cols = static_cast<long>(depth.cols());
  const long radius = cfg.window_radius;
  const double thr_sq = cfg.correlation_threshold * cfg.correlation_threshold;

  AdiImage out(depth.rows(), depth.cols());
  for (long y = 0; y < rows; ++y) {
    for (long x = 0; x < cols; ++x) {
      if (!depth.valid(y, x)) continue;
      const DepthSample& center = depth.sample(y, x);
      double sum = 0.0;
      long used = 0;
      for (long dy = -radius; dy <= radius; ++dy) {
        for (long dx = -radius; dx <= radius; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const long ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= rows || nx < 0 || nx >= cols) continue;
          if (!depth.valid(ny, nx)) continue;
          const DepthSample& n = depth.sample(ny, nx);
          if ((n.point - center.point).squaredNorm() > thr_sq) continue;
          sum += std::abs(center.point.z() - n.point.z()) / std::sqrt(static_cast<double>(dx * dx + dy * dy));
          ++used;
        }
      }
      if (used > 0) out(y, x) = sum / static_cast<double>(used);
    }
  }
  return out;
}

}  // namespace adinav::adi
