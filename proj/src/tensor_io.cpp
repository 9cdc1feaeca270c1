#include "adinav/tensor.hpp"

#include "adinav/file_util.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace adinav {

namespace {

constexpr std::uint8_t kMagic[4] = {'A', 'D', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxDims = 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

Tensor::Tensor(std::vector<std::uint64_t> s, double fill) : shape(std::move(s)) {
  data.assign(element_count(), fill);
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t, TensorDtype dtype) {
  if (t.shape.empty() || t.shape.size() > kMaxDims) {
    throw Error(ErrorCode::InvalidArgument, "tensor rank must be 1.." + std::to_string(kMaxDims));
  }
  if (t.element_count() != t.data.size()) {
    throw Error(ErrorCode::ShapeMismatch, "tensor data does not match its shape");
  }
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(dtype));
  put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
  for (auto d : t.shape) put_u64(out, d);
  const std::size_t width = dtype == TensorDtype::float32 ? 4 : 8;
  out.reserve(out.size() + width * t.data.size());
  for (double v : t.data) {
    if (dtype == TensorDtype::float32) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  auto fail = [](const std::string& why) { return Error(ErrorCode::MalformedFile, "tensor: " + why); };
  if (bytes.size() < 16) throw fail("truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw fail("bad magic");
  if (get_u32(bytes.data() + 4) != kVersion) throw fail("unsupported version");
  const std::uint32_t dtype = get_u32(bytes.data() + 8);
  if (dtype != 1 && dtype != 2) throw fail("unknown dtype " + std::to_string(dtype));
  const std::uint32_t ndim = get_u32(bytes.data() + 12);
  if (ndim == 0 || ndim > kMaxDims) throw fail("bad rank");
  const std::size_t header = 16 + 8 * static_cast<std::size_t>(ndim);
  if (bytes.size() < header) throw fail("truncated shape");

  Tensor t;
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    const std::uint64_t d = get_u64(bytes.data() + 16 + 8 * i);
    if (d != 0 && count > std::numeric_limits<std::size_t>::max() / 8 / d) throw fail("shape overflow");
    count *= static_cast<std::size_t>(d);
    t.shape.push_back(d);
  }
  const std::size_t width = dtype == 1 ? 4 : 8;
  if (bytes.size() - header != count * width) throw fail("payload size does not match shape");
  t.data.resize(count);
  const std::uint8_t* p = bytes.data() + header;
  for (std::size_t i = 0; i < count; ++i) {
    t.data[i] = dtype == 1 ? static_cast<double>(std::bit_cast<float>(get_u32(p + 4 * i)))
                           : std::bit_cast<double>(get_u64(p + 8 * i));
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t, TensorDtype dtype) {
  write_file_atomic(path, encode_tensor(t, dtype));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file_bytes(path)); }

}  // namespace adinav
