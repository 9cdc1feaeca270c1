#include "adinav/image_io.hpp"

#include "adinav/common.hpp"
#include "adinav/file_util.hpp"

#include <png.h>

#include <cstring>
#include <string>

namespace adinav {

namespace {

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

void read_from_buffer(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + n > cur->bytes->size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->bytes->data() + cur->offset, n);
  cur->offset += n;
}

void write_to_buffer(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void flush_noop(png_structp) {}

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  *what = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

RasterImage read_png(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::MalformedFile, "not a PNG file: " + path.string());
  }
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorCode::IoError, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  RasterImage img;
  std::vector<png_bytep> row_ptrs;
  std::vector<std::uint8_t> raw;
  ReadCursor cursor{&bytes, 0};

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::MalformedFile, "PNG decode failed (" + err + "): " + path.string());
  }
  png_set_read_fn(png, &cursor, read_from_buffer);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  img.cols = png_get_image_width(png, info);
  img.rows = png_get_image_height(png, info);
  img.channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  img.bit_depth = depth == 16 ? 16 : 8;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * img.rows);
  row_ptrs.resize(img.rows);
  for (std::size_t r = 0; r < img.rows; ++r) row_ptrs[r] = raw.data() + r * rowbytes;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = img.rows * img.cols * static_cast<std::size_t>(img.channels);
  img.data.resize(n);
  if (img.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      img.data[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) img.data[i] = raw[i];
  }
  return img;
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
  int color = 0;
  switch (image.channels) {
    case 1: color = PNG_COLOR_TYPE_GRAY; break;
    case 2: color = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color = PNG_COLOR_TYPE_RGB; break;
    case 4: color = PNG_COLOR_TYPE_RGB_ALPHA; break;
    default: throw Error(ErrorCode::InvalidArgument, "unsupported channel count");
  }
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    throw Error(ErrorCode::InvalidArgument, "PNG bit depth must be 8 or 16");
  }
  const std::size_t per_row = image.cols * static_cast<std::size_t>(image.channels);
  if (image.data.size() != per_row * image.rows) {
    throw Error(ErrorCode::ShapeMismatch, "image data does not match its size");
  }
  const std::size_t width = image.bit_depth == 16 ? 2 : 1;
  std::vector<std::uint8_t> raw(per_row * image.rows * width);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    if (width == 2) {
      raw[2 * i] = static_cast<std::uint8_t>(image.data[i] >> 8);
      raw[2 * i + 1] = static_cast<std::uint8_t>(image.data[i] & 0xff);
    } else {
      raw[i] = static_cast<std::uint8_t>(image.data[i]);
    }
  }

  std::string err;
  std::vector<std::uint8_t> encoded;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorCode::IoError, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(image.rows);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "PNG encode failed (" + err + ")");
  }
  png_set_write_fn(png, &encoded, write_to_buffer, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols), static_cast<png_uint_32>(image.rows),
               image.bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < image.rows; ++r) rows[r] = raw.data() + r * per_row * width;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  write_file_atomic(path, encoded);
}

}  // namespace adinav
