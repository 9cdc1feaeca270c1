#ifndef ADINAV_IMAGE_IO_HPP
#define ADINAV_IMAGE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

namespace adinav {

/// Decoded PNG: interleaved samples, row-major, 8- or 16-bit.
struct RasterImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int channels = 1;   // 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA
  int bit_depth = 8;  // 8 or 16
  std::vector<std::uint16_t> data;

  std::uint16_t at(std::size_t r, std::size_t c, int ch = 0) const {
    return data[(r * cols + c) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(ch)];
  }
  std::uint16_t max_value() const { return bit_depth == 16 ? 65535 : 255; }
};

/// Palette and low-bit-depth images are expanded to 8 bits. Throws
/// MissingFile, MalformedFile.
RasterImage read_png(const std::filesystem::path& path);

/// Atomic write. Throws IoError, InvalidArgument.
void write_png(const std::filesystem::path& path, const RasterImage& image);

}  // namespace adinav

#endif  // ADINAV_IMAGE_IO_HPP
