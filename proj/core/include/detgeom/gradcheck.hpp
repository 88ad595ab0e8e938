#pragma once

#include <cstdint>
#include <vector>

#include "detgeom/bbox.hpp"
#include "detgeom/losses.hpp"

namespace detgeom {

// Central differences of loss_value with the given step on each of the
// predicted box's (cx, cy, w, h).
Gradient finite_difference_gradient(const BBox& gt, const BBox& pred, const LossSpec& spec, double step = 1e-6);

// max_i |a_i - f_i| / max(max|a|, max|f|, 1e-3). The floor keeps the
// roundoff of the difference quotient (~1e-10) from dominating when both
// gradients vanish.
double gradient_relative_error(const Gradient& analytic, const Gradient& numeric);

struct GradCheckFailure {
  BBox gt;
  BBox pred;
  Gradient analytic;
  Gradient numeric;
  double rel_error;
};

struct GradCheckReport {
  LossSpec spec;
  std::size_t samples = 0;
  std::size_t checked = 0;
  std::size_t skipped_non_smooth = 0;
  double worst_rel_error = 0.0;
  std::vector<GradCheckFailure> failures;

  bool passed() const { return failures.empty(); }
};

// Random (gt, pred) pair mixing overlapping, nested and disjoint layouts in
// the unit square.
std::pair<BBox, BBox> random_box_pair(std::uint64_t seed, std::size_t index);

// Pairs whose smooth_margin is below 10 * step are counted as skipped.
GradCheckReport run_grad_check(const LossSpec& spec, std::size_t samples, std::uint64_t seed, double tolerance,
                               double step = 1e-6);

}  // namespace detgeom
