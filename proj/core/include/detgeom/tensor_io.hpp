#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "detgeom/involution.hpp"
#include "detgeom/tensor.hpp"

namespace detgeom {

// Binary records, all integers and values little-endian:
//   tensor: "DGTENSR1" | u64 N C H W | f64 data[N*C*H*W]
//   kernel: "DGKERNL1" | u64 batch H W K G | f64 data (batch, G, K, K, H, W order)
// An involution fixture file is a tensor record, a kernel record and an
// optional expected-output tensor record, back to back.
inline constexpr char kTensorMagic[9] = "DGTENSR1";
inline constexpr char kKernelMagic[9] = "DGKERNL1";

void write_tensor(std::ostream& os, const Tensor4& t);
Tensor4 read_tensor(std::istream& is);
void write_kernel(std::ostream& os, const InvolutionKernel& k);
InvolutionKernel read_kernel(std::istream& is);

void save_tensor(const std::filesystem::path& path, const Tensor4& t);
Tensor4 load_tensor(const std::filesystem::path& path);

struct InvolutionFixture {
  Tensor4 input;
  InvolutionKernel kernel;
  std::optional<Tensor4> expected;
};

void save_fixture(const std::filesystem::path& path, const InvolutionFixture& fixture);
InvolutionFixture load_fixture(const std::filesystem::path& path);

}  // namespace detgeom
