#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "detgeom/tensor.hpp"

namespace detgeom {

// Per-pixel, per-group K x K kernels over an H x W map. `batch` is either 1
// (one kernel shared by every image of the input) or equal to the input's N.
// Storage order is (batch, group, ky, kx, row, col).
class InvolutionKernel {
 public:
  InvolutionKernel() = default;
  InvolutionKernel(std::size_t batch, std::size_t height, std::size_t width, std::size_t k, std::size_t groups,
                   double fill = 0.0);
  InvolutionKernel(std::size_t batch, std::size_t height, std::size_t width, std::size_t k, std::size_t groups,
                   std::vector<double> data);

  std::size_t batch() const { return batch_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t k() const { return k_; }
  std::size_t groups() const { return groups_; }

  std::size_t index(std::size_t n, std::size_t row, std::size_t col, std::size_t ky, std::size_t kx,
                    std::size_t g) const {
    return ((((n * groups_ + g) * k_ + ky) * k_ + kx) * height_ + row) * width_ + col;
  }
  double& at(std::size_t n, std::size_t row, std::size_t col, std::size_t ky, std::size_t kx, std::size_t g) {
    return data_[index(n, row, col, ky, kx, g)];
  }
  double at(std::size_t n, std::size_t row, std::size_t col, std::size_t ky, std::size_t kx, std::size_t g) const {
    return data_[index(n, row, col, ky, kx, g)];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  // Every pixel gets the same K x K kernel with 1 at the center.
  static InvolutionKernel delta(std::size_t height, std::size_t width, std::size_t k, std::size_t groups);
  static InvolutionKernel random(std::size_t batch, std::size_t height, std::size_t width, std::size_t k,
                                 std::size_t groups, std::uint64_t seed);

 private:
  std::size_t batch_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t k_ = 0;
  std::size_t groups_ = 0;
  std::vector<double> data_;
};

enum class Activation { Relu, Identity };

// Kernel generation phi: per pixel, reduce C -> C/r, apply the nonlinearity,
// expand C/r -> K*K*G. Output channel o maps to group o / (K*K) and
// kernel tap (o % (K*K)) / K, (o % (K*K)) % K.
struct KernelGenSpec {
  std::size_t channels = 4;
  std::size_t reduction = 4;
  std::size_t k = 3;
  std::size_t groups = 1;
  Activation activation = Activation::Relu;
  std::vector<double> reduce_weight;  // (C/r) x C, row-major
  std::vector<double> reduce_bias;    // C/r
  std::vector<double> expand_weight;  // (K*K*G) x (C/r), row-major
  std::vector<double> expand_bias;    // K*K*G

  std::size_t hidden() const { return channels / reduction; }
  std::size_t outputs() const { return k * k * groups; }
  void validate() const;

  // Weights drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
  static KernelGenSpec random(std::size_t channels, std::size_t k, std::size_t groups, std::size_t reduction,
                              std::uint64_t seed);
};

// Y[n,c,i,j] = sum_{u,v} H[n,i,j,u+K/2,v+K/2,g(c)] * X[n,c,i+u,j+v],
// g(c) = c * G / C, zero padding of K/2, stride 1.
Tensor4 involute(const Tensor4& x, const InvolutionKernel& kernel);

// Direct per-output-element evaluation of the same sum; slow reference.
Tensor4 involute_reference(const Tensor4& x, const InvolutionKernel& kernel);

InvolutionKernel generate_kernel(const Tensor4& x, const KernelGenSpec& spec);

// Throws the typed errors involute() would throw for this pair.
void check_involution_args(const Shape4& x, const InvolutionKernel& kernel);

}  // namespace detgeom
