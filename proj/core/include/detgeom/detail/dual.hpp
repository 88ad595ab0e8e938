#pragma once

// Forward-mode dual numbers carrying the four partials d/d(cx, cy, w, h) of
// the predicted box. Loss kernels are written once over a scalar type and
// instantiated with double (value only) and Dual4 (value plus exact
// derivatives by the chain rule).

#include <array>
#include <cmath>

namespace detgeom::detail {

struct Dual4 {
  double v = 0.0;
  std::array<double, 4> d{};

  Dual4() = default;
  Dual4(double value) : v(value) {}  // NOLINT: implicit constants are intended
  Dual4(double value, int seed) : v(value) { d[static_cast<std::size_t>(seed)] = 1.0; }

  // Result of applying a scalar function with the given value and slope.
  Dual4 chain(double value, double slope) const {
    Dual4 r(value);
    for (std::size_t i = 0; i < 4; ++i) r.d[i] = slope * d[i];
    return r;
  }
};

inline Dual4 operator+(const Dual4& a, const Dual4& b) {
  Dual4 r(a.v + b.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
inline Dual4 operator-(const Dual4& a, const Dual4& b) {
  Dual4 r(a.v - b.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
inline Dual4 operator-(const Dual4& a) {
  Dual4 r(-a.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = -a.d[i];
  return r;
}
inline Dual4 operator*(const Dual4& a, const Dual4& b) {
  Dual4 r(a.v * b.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
inline Dual4 operator/(const Dual4& a, const Dual4& b) {
  Dual4 r(a.v / b.v);
  const double inv = 1.0 / (b.v * b.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv;
  return r;
}

inline Dual4 exp(const Dual4& a) {
  const double e = std::exp(a.v);
  return a.chain(e, e);
}
inline Dual4 sqrt(const Dual4& a) {
  const double s = std::sqrt(a.v);
  return a.chain(s, s > 0.0 ? 0.5 / s : 0.0);
}
inline Dual4 sin(const Dual4& a) { return a.chain(std::sin(a.v), std::cos(a.v)); }
inline Dual4 asin(const Dual4& a) { return a.chain(std::asin(a.v), 1.0 / std::sqrt(1.0 - a.v * a.v)); }
inline Dual4 atan(const Dual4& a) { return a.chain(std::atan(a.v), 1.0 / (1.0 + a.v * a.v)); }
inline Dual4 pow(const Dual4& a, double p) {
  const double value = std::pow(a.v, p);
  const double slope = (a.v == 0.0) ? (p == 1.0 ? 1.0 : 0.0) : p * std::pow(a.v, p - 1.0);
  return a.chain(value, slope);
}
// Subgradient at zero is 0.
inline Dual4 abs(const Dual4& a) { return a.chain(std::abs(a.v), a.v > 0.0 ? 1.0 : (a.v < 0.0 ? -1.0 : 0.0)); }

inline double value(double x) { return x; }
inline double value(const Dual4& x) { return x.v; }

// Ties resolve to the first argument.
template <class T>
T vmin(const T& a, const T& b) {
  return value(b) < value(a) ? b : a;
}
template <class T>
T vmax(const T& a, const T& b) {
  return value(b) > value(a) ? b : a;
}

}  // namespace detgeom::detail
