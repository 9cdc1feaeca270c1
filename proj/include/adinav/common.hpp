#ifndef ADINAV_COMMON_HPP
#define ADINAV_COMMON_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adinav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Failure categories raised across the library. The CLI maps each one to an
/// exit code (see exit_code_for).
enum class ErrorCode {
  // numerical
  LatitudeNearPole,
  GimbalLock,
  StepTooLarge,
  NonMonotonicTime,
  CovarianceNotPSD,
  NoValidPixels,
  PoseGap,
  NonPositiveDepth,
  InfeasibleTrajectory,
  EmptyStream,
  // input / contract
  FrameMismatch,
  ShapeMismatch,
  EmptyTaskSet,
  InvalidArgument,
  MalformedFile,
  MalformedNumber,
  MissingField,
  MissingFile,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Row-major H x W grid.
template <typename T>
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
  template <typename U>
  bool same_shape(const Grid<U>& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

}  // namespace adinav

#endif  // ADINAV_COMMON_HPP
