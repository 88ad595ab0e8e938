#include "detgeom/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "detgeom/error.hpp"

namespace detgeom {

namespace {

// Refuse absurd headers before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (std::size_t i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw ValidationError("truncated tensor header");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_values(std::ostream& os, std::span<const double> values) {
  for (double d : values) put_u64(os, std::bit_cast<std::uint64_t>(d));
}

std::vector<double> get_values(std::istream& is, std::uint64_t count) {
  std::vector<double> out(count);
  for (auto& d : out) {
    try {
      d = std::bit_cast<double>(get_u64(is));
    } catch (const ValidationError&) {
      throw ValidationError("truncated tensor data");
    }
  }
  return out;
}

void expect_magic(std::istream& is, const char* magic, const char* what) {
  char buf[8];
  if (!is.read(buf, 8) || std::memcmp(buf, magic, 8) != 0) {
    throw ValidationError(std::string("bad ") + what + " magic (expected " + std::string(magic, 8) + ")");
  }
}

std::uint64_t checked_product(std::initializer_list<std::uint64_t> dims) {
  std::uint64_t p = 1;
  for (auto d : dims) {
    if (d == 0 || d > kMaxElements || p > kMaxElements / d) throw ValidationError("tensor dims out of range");
    p *= d;
  }
  return p;
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor4& t) {
  os.write(kTensorMagic, 8);
  const Shape4& s = t.shape();
  put_u64(os, s.n);
  put_u64(os, s.c);
  put_u64(os, s.h);
  put_u64(os, s.w);
  put_values(os, t.data());
}

Tensor4 read_tensor(std::istream& is) {
  expect_magic(is, kTensorMagic, "tensor");
  const std::uint64_t n = get_u64(is), c = get_u64(is), h = get_u64(is), w = get_u64(is);
  const std::uint64_t count = checked_product({n, c, h, w});
  Shape4 s{static_cast<std::size_t>(n), static_cast<std::size_t>(c), static_cast<std::size_t>(h),
           static_cast<std::size_t>(w)};
  return Tensor4(s, get_values(is, count));
}

void write_kernel(std::ostream& os, const InvolutionKernel& k) {
  os.write(kKernelMagic, 8);
  put_u64(os, k.batch());
  put_u64(os, k.height());
  put_u64(os, k.width());
  put_u64(os, k.k());
  put_u64(os, k.groups());
  put_values(os, k.data());
}

InvolutionKernel read_kernel(std::istream& is) {
  expect_magic(is, kKernelMagic, "kernel");
  const std::uint64_t b = get_u64(is), h = get_u64(is), w = get_u64(is), k = get_u64(is), g = get_u64(is);
  const std::uint64_t count = checked_product({b, h, w, k, k, g});
  return InvolutionKernel(b, h, w, k, g, get_values(is, count));
}

void save_tensor(const std::filesystem::path& path, const Tensor4& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
  if (!os) throw IoError("write failed: " + path.string());
}

Tensor4 load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  return read_tensor(is);
}

void save_fixture(const std::filesystem::path& path, const InvolutionFixture& fixture) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(os, fixture.input);
  write_kernel(os, fixture.kernel);
  if (fixture.expected) write_tensor(os, *fixture.expected);
  if (!os) throw IoError("write failed: " + path.string());
}

InvolutionFixture load_fixture(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  InvolutionFixture f{read_tensor(is), read_kernel(is), std::nullopt};
  if (is.peek() != std::char_traits<char>::eof()) f.expected = read_tensor(is);
  return f;
}

}  // namespace detgeom
