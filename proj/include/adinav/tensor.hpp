#ifndef ADINAV_TENSOR_HPP
#define ADINAV_TENSOR_HPP

#include "adinav/common.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace adinav {

/// Row-major dense tensor of doubles with an explicit shape.
struct Tensor {
  std::vector<std::uint64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::uint64_t> s, double fill = 0.0);

  std::size_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

/// On-disk element type of the binary tensor format (docs/formats.md).
enum class TensorDtype : std::uint32_t { float32 = 1, float64 = 2 };

/// Serializes to the little-endian binary tensor layout.
std::vector<std::uint8_t> encode_tensor(const Tensor& t, TensorDtype dtype);
/// Throws MalformedFile on any header or size inconsistency.
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t, TensorDtype dtype);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace adinav

#endif  // ADINAV_TENSOR_HPP
