#include "detgeom/regression_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "detgeom/error.hpp"
#include "detgeom/parallel.hpp"
#include "detgeom/random.hpp"

namespace detgeom {

namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-') c = '_';
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

BBox random_gt(Rng& rng) {
  return {rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)};
}

BBox perturbed(Rng& rng, const BBox& gt, double center_reach, double log_size_reach) {
  const double cx = gt.cx() + rng.uniform(-center_reach, center_reach) * gt.w();
  const double cy = gt.cy() + rng.uniform(-center_reach, center_reach) * gt.h();
  const double w = gt.w() * std::exp(rng.uniform(-log_size_reach, log_size_reach));
  const double h = gt.h() * std::exp(rng.uniform(-log_size_reach, log_size_reach));
  return {cx, cy, w, h};
}

BoxPair sample_pair(const SimConfig& config, std::size_t index) {
  Rng rng(config.seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  for (std::size_t attempt = 0; attempt < config.max_attempts; ++attempt) {
    const BBox gt = random_gt(rng);
    BBox anchor = gt;
    bool ok = false;
    switch (config.scenario) {
      case Scenario::UniformRandom: {
        anchor = perturbed(rng, gt, 1.0, std::log(2.0));
        ok = !config.require_overlap || iou(gt, anchor) > 0.0;
        break;
      }
      case Scenario::HighIouStart: {
        anchor = perturbed(rng, gt, 0.25, std::log(1.3));
        ok = iou(gt, anchor) >= 0.6;
        break;
      }
      case Scenario::LowIouStart: {
        anchor = perturbed(rng, gt, 1.0, std::log(2.0));
        const double v = iou(gt, anchor);
        ok = v > 0.0 && v <= 0.2;
        break;
      }
      case Scenario::AxisAlignedOffset: {
        const double offset = rng.uniform(-0.9, 0.9);
        const double size = std::exp(rng.uniform(-std::log(1.5), std::log(1.5)));
        const bool along_x = rng.below(2) == 0;
        anchor = along_x ? BBox(gt.cx() + offset * gt.w(), gt.cy(), gt.w() * size, gt.h())
                         : BBox(gt.cx(), gt.cy() + offset * gt.h(), gt.w(), gt.h() * size);
        ok = !config.require_overlap || iou(gt, anchor) > 0.0;
        break;
      }
    }
    if (ok) return {gt, anchor};
  }
  std::ostringstream os;
  os << "scenario " << to_string(config.scenario) << " unsatisfiable: pair " << index << " found no sample after "
     << config.max_attempts << " attempts";
  throw ScenarioUnsatisfiableError(os.str());
}

struct PairTrace {
  std::vector<double> loss;
  std::vector<double> iou;
  std::optional<std::size_t> first_below;
};

PairTrace descend_one(const BoxPair& pair, std::size_t pair_index, const LossSpec& spec, const SimConfig& config) {
  PairTrace out;
  out.loss.reserve(config.steps);
  out.iou.reserve(config.steps);
  std::array<double, 4> p = {pair.anchor.cx(), pair.anchor.cy(), pair.anchor.w(), pair.anchor.h()};
  std::array<double, 4> m{};
  std::array<double, 4> v{};
  double lr = config.lr;
  double b1t = 1.0;
  double b2t = 1.0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const BBox pred(p[0], p[1], p[2], p[3]);
    const LossResult r = evaluate_loss(pair.gt, pred, spec, true);
    out.loss.push_back(r.value);
    out.iou.push_back(iou(pair.gt, pred));
    if (!out.first_below && r.value < config.stop_loss) out.first_below = step;
    const Gradient& g = *r.grad;
    for (std::size_t i = 0; i < 4; ++i) {
      if (!std::isfinite(g[i]) || !std::isfinite(r.value)) {
        std::ostringstream os;
        os << "non-finite gradient for loss " << to_string(spec.kind) << " at pair " << pair_index << ", step "
           << step << " (pred cx=" << p[0] << " cy=" << p[1] << " w=" << p[2] << " h=" << p[3] << ")";
        throw NumericError(os.str());
      }
    }
    if (config.optimizer == Optimizer::Sgd) {
      for (std::size_t i = 0; i < 4; ++i) p[i] -= lr * g[i];
    } else {
      b1t *= config.adam_beta1;
      b2t *= config.adam_beta2;
      for (std::size_t i = 0; i < 4; ++i) {
        m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g[i];
        v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g[i] * g[i];
        const double mhat = m[i] / (1.0 - b1t);
        const double vhat = v[i] / (1.0 - b2t);
        p[i] -= lr * mhat / (std::sqrt(vhat) + config.adam_epsilon);
      }
    }
    p[2] = std::max(p[2], kMinBoxSide);
    p[3] = std::max(p[3], kMinBoxSide);
    lr *= config.lr_decay;
  }
  return out;
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::UniformRandom: return "uniform_random";
    case Scenario::HighIouStart: return "high_iou_start";
    case Scenario::LowIouStart: return "low_iou_start";
    case Scenario::AxisAlignedOffset: return "axis_aligned_offset";
  }
  return "unknown";
}

std::string_view to_string(Optimizer o) { return o == Optimizer::Sgd ? "sgd" : "adam"; }

Scenario parse_scenario(std::string_view name) {
  const std::string key = lower(name);
  for (Scenario s : {Scenario::UniformRandom, Scenario::HighIouStart, Scenario::LowIouStart,
                     Scenario::AxisAlignedOffset}) {
    if (to_string(s) == key) return s;
  }
  throw ValidationError("unknown scenario '" + std::string(name) + "'");
}

Optimizer parse_optimizer(std::string_view name) {
  const std::string key = lower(name);
  if (key == "sgd") return Optimizer::Sgd;
  if (key == "adam") return Optimizer::Adam;
  throw ValidationError("unknown optimizer '" + std::string(name) + "' (expected sgd|adam)");
}

std::vector<LossSpec> SimConfig::default_losses() {
  LossSpec siou;
  siou.kind = LossKind::SIoU;
  LossSpec sib;
  sib.kind = LossKind::SIB_IoU;
  return {siou, sib};
}

void SimConfig::validate() const {
  if (n_pairs < 1) throw ValidationError("sim.n_pairs must be >= 1");
  if (steps < 1) throw ValidationError("sim.steps must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("sim.lr must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ValidationError("sim.lr_decay must be in (0, 1]");
  if (!(stop_loss > 0.0)) throw ValidationError("sim.stop_loss must be > 0");
  if (max_attempts < 1) throw ValidationError("sim.max_attempts must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("adam betas must be in [0, 1)");
  }
  for (const LossSpec& s : losses) s.validate();
}

double ConvergenceTrace::area_under_loss() const {
  double a = 0.0;
  for (std::size_t i = 1; i < loss_mean.size(); ++i) a += 0.5 * (loss_mean[i - 1] + loss_mean[i]);
  return a;
}

std::vector<BoxPair> generate_pairs(const SimConfig& config) {
  config.validate();
  std::vector<std::optional<BoxPair>> slots(config.n_pairs);
  std::vector<std::optional<ScenarioUnsatisfiableError>> errors(config.n_pairs);
  parallel_for(config.n_pairs, [&](std::size_t i) {
    try {
      slots[i] = sample_pair(config, i);
    } catch (const ScenarioUnsatisfiableError& e) {
      errors[i] = e;
    }
  });
  std::vector<BoxPair> pairs;
  pairs.reserve(config.n_pairs);
  for (std::size_t i = 0; i < config.n_pairs; ++i) {
    if (errors[i]) throw *errors[i];
    pairs.push_back(*slots[i]);
  }
  return pairs;
}

ConvergenceTrace run_descent(std::span<const BoxPair> pairs, const LossSpec& spec, const SimConfig& config) {
  config.validate();
  spec.validate();
  if (pairs.empty()) throw ValidationError("run_descent needs at least one pair");
  std::vector<PairTrace> per_pair(pairs.size());
  std::vector<std::optional<NumericError>> errors(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    try {
      per_pair[i] = descend_one(pairs[i], i, spec, config);
    } catch (const NumericError& e) {
      errors[i] = e;
    }
  });
  for (const auto& e : errors) {
    if (e) throw *e;
  }

  ConvergenceTrace trace;
  trace.spec = spec;
  trace.label = loss_labels(std::span<const LossSpec>(&spec, 1)).front();
  trace.loss_mean.assign(config.steps, 0.0);
  trace.iou_mean.assign(config.steps, 0.0);
  const double inv = 1.0 / static_cast<double>(pairs.size());
  // Fixed pair order keeps the reduction bit-identical across thread counts.
  for (std::size_t step = 0; step < config.steps; ++step) {
    double ls = 0.0;
    double is = 0.0;
    for (const PairTrace& t : per_pair) {
      ls += t.loss[step];
      is += t.iou[step];
    }
    trace.loss_mean[step] = ls * inv;
    trace.iou_mean[step] = std::clamp(is * inv, 0.0, 1.0);
    if (!trace.steps_to_threshold && trace.loss_mean[step] < config.stop_loss) trace.steps_to_threshold = step;
  }
  double steps_sum = 0.0;
  for (const PairTrace& t : per_pair) {
    if (t.first_below) {
      ++trace.converged_pairs;
      steps_sum += static_cast<double>(*t.first_below);
    } else {
      steps_sum += static_cast<double>(config.steps);
    }
  }
  trace.mean_pair_steps = steps_sum * inv;
  return trace;
}

ComparisonReport compare_losses(const SimConfig& config) {
  config.validate();
  if (config.losses.size() < 2) throw ValidationError("compare_losses needs at least 2 losses");
  ComparisonReport report;
  report.config = config;
  const std::vector<BoxPair> pairs = generate_pairs(config);
  report.n_pairs = pairs.size();
  const std::vector<std::string> labels = loss_labels(config.losses);
  for (std::size_t i = 0; i < config.losses.size(); ++i) {
    ConvergenceTrace t = run_descent(pairs, config.losses[i], config);
    t.label = labels[i];
    report.traces.push_back(std::move(t));
  }
  return report;
}

std::vector<std::string> loss_labels(std::span<const LossSpec> losses) {
  std::vector<std::string> base;
  for (const LossSpec& s : losses) {
    std::string label(to_string(s.kind));
    if (s.kind == LossKind::InnerIoU || s.kind == LossKind::SIB_IoU) {
      std::ostringstream os;
      os << "_r" << s.ratio;
      label += os.str();
    }
    if (s.shape_sign == ShapeSign::AsPrinted && (s.kind == LossKind::SIoU || s.kind == LossKind::SIB_IoU)) {
      label += "_asprinted";
    }
    base.push_back(label);
  }
  std::map<std::string, std::size_t> total;
  for (const auto& b : base) ++total[b];
  std::map<std::string, std::size_t> seen;
  std::vector<std::string> out;
  for (const auto& b : base) {
    if (total[b] > 1) {
      out.push_back(b + "_" + std::to_string(seen[b]++));
    } else {
      out.push_back(b);
    }
  }
  return out;
}

}  // namespace detgeom
