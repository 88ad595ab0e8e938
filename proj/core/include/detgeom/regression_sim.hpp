#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detgeom/bbox.hpp"
#include "detgeom/losses.hpp"

namespace detgeom {

enum class Scenario { UniformRandom, HighIouStart, LowIouStart, AxisAlignedOffset };
enum class Optimizer { Sgd, Adam };

std::string_view to_string(Scenario s);
std::string_view to_string(Optimizer o);
Scenario parse_scenario(std::string_view name);
Optimizer parse_optimizer(std::string_view name);

inline constexpr double kMinBoxSide = 1e-4;

struct SimConfig {
  std::size_t n_pairs = 200;
  Scenario scenario = Scenario::UniformRandom;
  std::size_t steps = 300;
  double lr = 0.002;
  double lr_decay = 0.99;
  std::uint64_t seed = 0;
  std::vector<LossSpec> losses = default_losses();
  double stop_loss = 0.05;
  Optimizer optimizer = Optimizer::Sgd;
  double adam_beta1 = 0.937;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // uniform_random and axis_aligned_offset reject pairs that do not overlap.
  bool require_overlap = true;
  std::size_t max_attempts = 10000;

  void validate() const;
  static std::vector<LossSpec> default_losses();
};

struct BoxPair {
  BBox gt;
  BBox anchor;
};

struct ConvergenceTrace {
  LossSpec spec;
  std::string label;
  std::vector<double> loss_mean;  // one entry per step, measured before the update
  std::vector<double> iou_mean;
  // First step whose mean loss is below stop_loss.
  std::optional<std::size_t> steps_to_threshold;
  // Per-pair first step below stop_loss, averaged; pairs that never get
  // there count as the full step budget.
  double mean_pair_steps = 0.0;
  std::size_t converged_pairs = 0;

  double final_loss() const { return loss_mean.empty() ? 0.0 : loss_mean.back(); }
  double final_iou() const { return iou_mean.empty() ? 0.0 : iou_mean.back(); }
  // Trapezoidal area under the mean-loss curve, unit step spacing.
  double area_under_loss() const;
};

struct ComparisonReport {
  SimConfig config;
  std::size_t n_pairs = 0;
  std::vector<ConvergenceTrace> traces;
};

std::vector<BoxPair> generate_pairs(const SimConfig& config);
ConvergenceTrace run_descent(std::span<const BoxPair> pairs, const LossSpec& spec, const SimConfig& config);
ComparisonReport compare_losses(const SimConfig& config);

// Distinct, file-name safe labels: "ciou", "sib_iou_r1.15". Specs that
// appear more than once get "_0", "_1", ... in order of appearance.
std::vector<std::string> loss_labels(std::span<const LossSpec> losses);

}  // namespace detgeom
