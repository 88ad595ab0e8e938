#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detgeom/bbox.hpp"

namespace detgeom {

struct GroundTruth {
  std::string image_id;
  int class_id = 0;
  BBox box;
};

struct Detection {
  std::string image_id;
  int class_id = 0;
  BBox box;
  double confidence = 0.0;
};

struct GroundTruthSet {
  std::vector<GroundTruth> entries;
  std::vector<std::string> class_names;  // optional id -> name table

  // Class ids must be non-negative and inside the name table when one is set.
  void validate() const;
  std::string class_name(int class_id) const;
};

struct DetectionSet {
  std::vector<Detection> entries;

  void validate() const;  // confidences in [0, 1], class ids >= 0
};

// Detection indices ordered by confidence descending, ties by input order.
std::vector<std::size_t> confidence_order(const DetectionSet& det);

struct MatchResult {
  std::vector<bool> det_tp;        // indexed like det.entries
  std::vector<bool> gt_matched;    // indexed like gt.entries
  std::vector<std::size_t> order;  // confidence_order(det)
};

// Greedy by confidence: each detection takes the highest-IoU unmatched truth
// of the same class and image when that IoU is >= iou_threshold, otherwise
// it is a false positive.
MatchResult match_detections(const GroundTruthSet& gt, const DetectionSet& det, double iou_threshold);

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// With no predictions: precision is 1 when there are no truths, 0 otherwise.
// With no truths: recall is 1.
PrecisionRecall precision_recall(const Counts& counts);

// TP/FP/FN of one class (all classes when class_id is nullopt). Verifies
// TP + FN == truths and TP + FP == detections; throws InvariantViolation
// otherwise.
Counts tally(const GroundTruthSet& gt, const DetectionSet& det, const MatchResult& match,
             std::optional<int> class_id = std::nullopt);

enum class Interpolation { AllPoints, Point101 };

std::string_view to_string(Interpolation i);
Interpolation parse_interpolation(std::string_view name);

struct PRPoint {
  double confidence = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct PRCurve {
  // One point per distinct confidence, descending; recall is non-decreasing.
  std::vector<PRPoint> points;
  double ap = 0.0;
  std::size_t num_truths = 0;
  std::size_t num_detections = 0;
};

// AP as the area under the monotone precision envelope. AllPoints sums
// recall increments times envelope precision; Point101 averages the envelope
// at recall 0, 0.01, ..., 1. Throws UndefinedMetricError when the class has
// no truths.
PRCurve average_precision(const GroundTruthSet& gt, const DetectionSet& det, int class_id, double iou_threshold,
                          Interpolation interp = Interpolation::AllPoints);

// Same, from an already computed match (the match must use iou_threshold).
PRCurve average_precision(const GroundTruthSet& gt, const DetectionSet& det, const MatchResult& match, int class_id,
                          Interpolation interp = Interpolation::AllPoints);

// Area under the envelope of recall-ordered (recall, precision) points.
double integrate_pr(const std::vector<PRPoint>& points, Interpolation interp);

// The ten thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

struct ClassAp {
  int class_id = 0;
  std::string name;
  std::size_t truths = 0;
  std::size_t detections = 0;
  std::vector<double> ap;  // one per threshold
  double mean_ap() const;
};

struct MapReport {
  std::vector<double> thresholds;
  std::vector<double> map_per_threshold;
  double map = 0.0;  // mean over thresholds
  std::vector<ClassAp> classes;  // classes with at least one truth, ascending id
  std::vector<int> excluded_classes;  // detections but no truths
  std::vector<std::string> notes;
};

// Throws ValidationError on empty thresholds and UndefinedMetricError when no
// class has truths.
MapReport mean_ap(const GroundTruthSet& gt, const DetectionSet& det, const std::vector<double>& thresholds,
                  Interpolation interp = Interpolation::AllPoints);

// counts[pred][truth] over N classes plus background at index N.
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::size_t> counts;

  std::size_t background() const { return num_classes; }
  std::size_t at(std::size_t pred, std::size_t truth) const { return counts[pred * (num_classes + 1) + truth]; }
  std::size_t& at(std::size_t pred, std::size_t truth) { return counts[pred * (num_classes + 1) + truth]; }
  std::size_t column_sum(std::size_t truth) const;
  std::size_t row_sum(std::size_t pred) const;
  // Each column divided by its sum; empty columns stay zero.
  std::vector<double> column_normalized() const;
};

// Class-agnostic greedy matching of detections with confidence >=
// conf_threshold; a match is counted in (pred class, true class).
// Unmatched detections land in (pred class, background), unmatched truths in
// (background, true class).
ConfusionMatrix confusion(const GroundTruthSet& gt, const DetectionSet& det, double iou_threshold,
                          double conf_threshold = 0.25, std::size_t num_classes = 0);

struct CurvePoint {
  double confidence = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassCurves {
  std::optional<int> class_id;  // nullopt for the pooled aggregate
  std::size_t truths = 0;
  std::vector<CurvePoint> sweep;  // confidence descending, includes 1 and 0
  PRCurve pr;
};

struct CurveBundle {
  std::vector<ClassCurves> per_class;
  ClassCurves aggregate;  // TP/FP pooled over classes
};

// P, R and F1 as functions of the confidence cut (detections with
// confidence >= cut), sampled at every distinct confidence plus 0 and 1.
CurveBundle curve_bundle(const GroundTruthSet& gt, const DetectionSet& det, double iou_threshold);

// Sorted distinct class ids from truths, detections and the name table.
std::vector<int> class_ids(const GroundTruthSet& gt, const DetectionSet& det);

}  // namespace detgeom
