#include "detgeom/involution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "detgeom/error.hpp"
#include "detgeom/random.hpp"

namespace detgeom {

namespace {

void check_kernel_dims(std::size_t batch, std::size_t height, std::size_t width, std::size_t k, std::size_t groups) {
  if (batch == 0 || height == 0 || width == 0 || k == 0 || groups == 0) {
    throw DimensionMismatchError("kernel dims must all be >= 1");
  }
  if (k % 2 == 0) throw EvenKernelError("kernel size must be odd (got " + std::to_string(k) + ")");
}

}  // namespace

InvolutionKernel::InvolutionKernel(std::size_t batch, std::size_t height, std::size_t width, std::size_t k,
                                   std::size_t groups, double fill)
    : batch_(batch), height_(height), width_(width), k_(k), groups_(groups) {
  check_kernel_dims(batch, height, width, k, groups);
  data_.assign(batch * groups * k * k * height * width, fill);
}

InvolutionKernel::InvolutionKernel(std::size_t batch, std::size_t height, std::size_t width, std::size_t k,
                                   std::size_t groups, std::vector<double> data)
    : batch_(batch), height_(height), width_(width), k_(k), groups_(groups), data_(std::move(data)) {
  check_kernel_dims(batch, height, width, k, groups);
  if (data_.size() != batch * groups * k * k * height * width) {
    throw DimensionMismatchError("kernel data length does not match batch*G*K*K*H*W");
  }
}

InvolutionKernel InvolutionKernel::delta(std::size_t height, std::size_t width, std::size_t k, std::size_t groups) {
  InvolutionKernel kern(1, height, width, k, groups, 0.0);
  const std::size_t mid = k / 2;
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t i = 0; i < height; ++i)
      for (std::size_t j = 0; j < width; ++j) kern.at(0, i, j, mid, mid, g) = 1.0;
  return kern;
}

InvolutionKernel InvolutionKernel::random(std::size_t batch, std::size_t height, std::size_t width, std::size_t k,
                                          std::size_t groups, std::uint64_t seed) {
  InvolutionKernel kern(batch, height, width, k, groups, 0.0);
  Rng rng(seed);
  for (double& v : kern.data_) v = rng.uniform(-1.0, 1.0);
  return kern;
}

void check_involution_args(const Shape4& x, const InvolutionKernel& kernel) {
  if (kernel.k() % 2 == 0) throw EvenKernelError("kernel size must be odd (got " + std::to_string(kernel.k()) + ")");
  if (kernel.height() != x.h || kernel.width() != x.w) {
    std::ostringstream os;
    os << "kernel spatial dims " << kernel.height() << "x" << kernel.width() << " do not match input " << x.h << "x"
       << x.w;
    throw DimensionMismatchError(os.str());
  }
  if (kernel.batch() != 1 && kernel.batch() != x.n) {
    throw DimensionMismatchError("kernel batch must be 1 or equal to the input batch");
  }
  if (x.c % kernel.groups() != 0) {
    std::ostringstream os;
    os << "channels not divisible by groups (C=" << x.c << ", G=" << kernel.groups() << ")";
    throw GroupMismatchError(os.str());
  }
}

Tensor4 involute(const Tensor4& x, const InvolutionKernel& kernel) {
  const Shape4 s = x.shape();
  check_involution_args(s, kernel);
  Tensor4 y(s, 0.0);
  const std::size_t k = kernel.k();
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  const auto H = static_cast<std::ptrdiff_t>(s.h);
  const auto W = static_cast<std::ptrdiff_t>(s.w);
  const std::size_t per_group = s.c / kernel.groups();
  auto xd = x.data();
  auto yd = y.data();
  auto kd = kernel.data();

  for (std::size_t n = 0; n < s.n; ++n) {
    const std::size_t kn = kernel.batch() == 1 ? 0 : n;
    for (std::size_t g = 0; g < kernel.groups(); ++g) {
      for (std::size_t ky = 0; ky < k; ++ky) {
        const std::ptrdiff_t u = static_cast<std::ptrdiff_t>(ky) - r;
        const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, -u);
        const std::ptrdiff_t i1 = std::min<std::ptrdiff_t>(H, H - u);
        for (std::size_t kx = 0; kx < k; ++kx) {
          const std::ptrdiff_t v = static_cast<std::ptrdiff_t>(kx) - r;
          const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, -v);
          const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(W, W - v);
          const double* kplane = kd.data() + kernel.index(kn, 0, 0, ky, kx, g);
          for (std::size_t c = g * per_group; c < (g + 1) * per_group; ++c) {
            const double* xplane = xd.data() + x.index(n, c, 0, 0);
            double* yplane = yd.data() + y.index(n, c, 0, 0);
            for (std::ptrdiff_t i = i0; i < i1; ++i) {
              const double* krow = kplane + i * W;
              const double* xrow = xplane + (i + u) * W + v;
              double* yrow = yplane + i * W;
              for (std::ptrdiff_t j = j0; j < j1; ++j) yrow[j] += krow[j] * xrow[j];
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor4 involute_reference(const Tensor4& x, const InvolutionKernel& kernel) {
  const Shape4 s = x.shape();
  check_involution_args(s, kernel);
  Tensor4 y(s, 0.0);
  const auto r = static_cast<long>(kernel.k() / 2);
  for (std::size_t n = 0; n < s.n; ++n) {
    const std::size_t kn = kernel.batch() == 1 ? 0 : n;
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t g = c * kernel.groups() / s.c;
      for (std::size_t i = 0; i < s.h; ++i) {
        for (std::size_t j = 0; j < s.w; ++j) {
          double acc = 0.0;
          for (long u = -r; u <= r; ++u) {
            for (long v = -r; v <= r; ++v) {
              const long ii = static_cast<long>(i) + u;
              const long jj = static_cast<long>(j) + v;
              if (ii < 0 || jj < 0 || ii >= static_cast<long>(s.h) || jj >= static_cast<long>(s.w)) continue;
              acc += kernel.at(kn, i, j, static_cast<std::size_t>(u + r), static_cast<std::size_t>(v + r), g) *
                     x.at(n, c, static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
            }
          }
          y.at(n, c, i, j) = acc;
        }
      }
    }
  }
  return y;
}

void KernelGenSpec::validate() const {
  if (channels == 0 || reduction == 0 || k == 0 || groups == 0) {
    throw DimensionMismatchError("kernel generation dims must all be >= 1");
  }
  if (k % 2 == 0) throw EvenKernelError("kernel size must be odd (got " + std::to_string(k) + ")");
  if (channels % reduction != 0) {
    throw DimensionMismatchError("channels not divisible by reduction (C=" + std::to_string(channels) +
                                 ", r=" + std::to_string(reduction) + ")");
  }
  if (channels % groups != 0) {
    throw GroupMismatchError("channels not divisible by groups (C=" + std::to_string(channels) +
                             ", G=" + std::to_string(groups) + ")");
  }
  if (reduce_weight.size() != hidden() * channels || reduce_bias.size() != hidden() ||
      expand_weight.size() != outputs() * hidden() || expand_bias.size() != outputs()) {
    throw DimensionMismatchError("kernel generation weight shapes do not match (C, r, K, G)");
  }
}

KernelGenSpec KernelGenSpec::random(std::size_t channels, std::size_t k, std::size_t groups, std::size_t reduction,
                                    std::uint64_t seed) {
  KernelGenSpec spec;
  spec.channels = channels;
  spec.k = k;
  spec.groups = groups;
  spec.reduction = reduction;
  if (reduction == 0 || channels % reduction != 0) spec.validate();  // throws with the precise reason
  Rng rng(seed);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(channels));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(spec.hidden()));
  spec.reduce_weight.resize(spec.hidden() * channels);
  for (double& w : spec.reduce_weight) w = rng.uniform(-a1, a1);
  spec.reduce_bias.assign(spec.hidden(), 0.0);
  spec.expand_weight.resize(spec.outputs() * spec.hidden());
  for (double& w : spec.expand_weight) w = rng.uniform(-a2, a2);
  spec.expand_bias.assign(spec.outputs(), 0.0);
  spec.validate();
  return spec;
}

InvolutionKernel generate_kernel(const Tensor4& x, const KernelGenSpec& spec) {
  spec.validate();
  const Shape4 s = x.shape();
  if (s.c != spec.channels) {
    throw DimensionMismatchError("input has " + std::to_string(s.c) + " channels, kernel generator expects " +
                                 std::to_string(spec.channels));
  }
  InvolutionKernel kern(s.n, s.h, s.w, spec.k, spec.groups, 0.0);
  const std::size_t hidden = spec.hidden();
  const std::size_t kk = spec.k * spec.k;
  std::vector<double> pixel(s.c);
  std::vector<double> z(hidden);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t i = 0; i < s.h; ++i) {
      for (std::size_t j = 0; j < s.w; ++j) {
        for (std::size_t c = 0; c < s.c; ++c) pixel[c] = x.at(n, c, i, j);
        for (std::size_t hdx = 0; hdx < hidden; ++hdx) {
          double acc = spec.reduce_bias[hdx];
          const double* row = spec.reduce_weight.data() + hdx * s.c;
          for (std::size_t c = 0; c < s.c; ++c) acc += row[c] * pixel[c];
          z[hdx] = spec.activation == Activation::Relu ? std::max(acc, 0.0) : acc;
        }
        for (std::size_t o = 0; o < spec.outputs(); ++o) {
          double acc = spec.expand_bias[o];
          const double* row = spec.expand_weight.data() + o * hidden;
          for (std::size_t hdx = 0; hdx < hidden; ++hdx) acc += row[hdx] * z[hdx];
          const std::size_t g = o / kk;
          const std::size_t tap = o % kk;
          kern.at(n, i, j, tap / spec.k, tap % spec.k, g) = acc;
        }
      }
    }
  }
  return kern;
}

}  // namespace detgeom
