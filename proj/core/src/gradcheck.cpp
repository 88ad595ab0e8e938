#include "detgeom/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "detgeom/error.hpp"
#include "detgeom/random.hpp"

namespace detgeom {

Gradient finite_difference_gradient(const BBox& gt, const BBox& pred, const LossSpec& spec, double step) {
  Gradient g{};
  const double base[4] = {pred.cx(), pred.cy(), pred.w(), pred.h()};
  for (std::size_t i = 0; i < 4; ++i) {
    double plus[4] = {base[0], base[1], base[2], base[3]};
    double minus[4] = {base[0], base[1], base[2], base[3]};
    plus[i] += step;
    minus[i] -= step;
    const double fp = loss_value(gt, BBox(plus[0], plus[1], plus[2], plus[3]), spec);
    const double fm = loss_value(gt, BBox(minus[0], minus[1], minus[2], minus[3]), spec);
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

double gradient_relative_error(const Gradient& analytic, const Gradient& numeric) {
  double diff = 0.0;
  double scale = 1e-3;
  for (std::size_t i = 0; i < 4; ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return diff / scale;
}

std::pair<BBox, BBox> random_box_pair(std::uint64_t seed, std::size_t index) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + index);
  const double gw = rng.uniform(0.02, 0.5);
  const double gh = rng.uniform(0.02, 0.5);
  const BBox gt(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), gw, gh);
  const double reach = 1.5 * std::max(gw, gh);
  const BBox pred(gt.cx() + rng.uniform(-reach, reach), gt.cy() + rng.uniform(-reach, reach),
                  rng.uniform(0.02, 0.5), rng.uniform(0.02, 0.5));
  return {gt, pred};
}

GradCheckReport run_grad_check(const LossSpec& spec, std::size_t samples, std::uint64_t seed, double tolerance,
                               double step) {
  spec.validate();
  if (!(tolerance > 0.0)) throw ValidationError("tolerance must be > 0");
  if (!(step > 0.0)) throw ValidationError("step must be > 0");
  GradCheckReport report;
  report.spec = spec;
  report.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto [gt, pred] = random_box_pair(seed, i);
    const LossResult r = evaluate_loss(gt, pred, spec, true);
    if (r.smooth_margin < 10.0 * step) {
      ++report.skipped_non_smooth;
      continue;
    }
    const Gradient numeric = finite_difference_gradient(gt, pred, spec, step);
    const double err = gradient_relative_error(*r.grad, numeric);
    ++report.checked;
    report.worst_rel_error = std::max(report.worst_rel_error, err);
    if (!(err <= tolerance)) report.failures.push_back({gt, pred, *r.grad, numeric, err});
  }
  return report;
}

}  // namespace detgeom
