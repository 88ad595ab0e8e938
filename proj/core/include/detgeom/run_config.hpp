#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "detgeom/detect_geom.hpp"
#include "detgeom/losses.hpp"
#include "detgeom/metrics.hpp"
#include "detgeom/regression_sim.hpp"

namespace detgeom {

struct MetricsConfig {
  std::vector<double> iou_thresholds = coco_thresholds();
  Interpolation interpolation = Interpolation::AllPoints;
  double curve_iou = 0.5;
  double confusion_iou = 0.5;
  double conf_threshold = 0.25;
  double nms_iou = 0.45;
};

struct GradCheckConfig {
  std::size_t samples = 1000;
  double tolerance = 1e-4;
  double step = 1e-6;
};

struct PathsConfig {
  std::string gt_dir;
  std::string pred_file;
  std::string names_file;
  std::string out_dir = "detgeom_out";
};

// Whole-run configuration. JSON with the sections below; every key is
// optional and unknown keys are rejected.
//
// {
//   "seed": 0,
//   "loss":      {"kind", "ratio", "theta", "epsilon", "shape_sign"},
//   "sim":       {"n_pairs", "scenario", "steps", "lr", "lr_decay", "stop_loss",
//                 "optimizer", "adam_beta1", "adam_beta2", "adam_epsilon",
//                 "require_overlap", "max_attempts", "losses": [loss objects]},
//   "gradcheck": {"samples", "tolerance", "step"},
//   "layout":    {"input_size", "heads": [{"name", "grid_h", "grid_w", "stride"}]},
//   "metrics":   {"iou_thresholds", "interpolation", "curve_iou", "confusion_iou",
//                 "conf_threshold", "nms_iou"},
//   "paths":     {"gt_dir", "pred_file", "names_file", "out_dir"}
// }
struct RunConfig {
  std::uint64_t seed = 0;
  LossSpec loss;
  SimConfig sim;
  GradCheckConfig gradcheck;
  HeadLayout layout;
  MetricsConfig metrics;
  PathsConfig paths;

  void validate() const;

  // Throws ConfigError naming the offending key.
  static RunConfig from_json_text(const std::string& text, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);
  // Fully resolved configuration (defaults filled in), stable key order.
  std::string to_json_text() const;
};

}  // namespace detgeom
