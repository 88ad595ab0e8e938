#include "detgeom/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detgeom/error.hpp"

namespace detgeom {

namespace {
void check_dims(const Shape4& s) {
  if (s.n == 0 || s.c == 0 || s.h == 0 || s.w == 0) {
    throw DimensionMismatchError("tensor dims must all be >= 1");
  }
}
}  // namespace

Tensor4::Tensor4(Shape4 shape, double fill) : shape_(shape) {
  check_dims(shape_);
  data_.assign(shape_.size(), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  check_dims(shape_);
  if (data_.size() != shape_.size()) {
    throw DimensionMismatchError("tensor data length does not match N*C*H*W");
  }
}

double max_abs_difference(const Tensor4& a, const Tensor4& b) {
  if (!(a.shape() == b.shape())) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

}  // namespace detgeom
