#include "detgeom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "detgeom/error.hpp"

namespace detgeom {

namespace {

void check_unit_interval(double t, const char* what) {
  if (!(t > 0.0 && t < 1.0)) {
    std::ostringstream os;
    os << what << " must be in (0, 1) (got " << t << ")";
    throw ValidationError(os.str());
  }
}

using ImageClassKey = std::pair<std::string, int>;

std::map<ImageClassKey, std::vector<std::size_t>> truths_by_image_class(const GroundTruthSet& gt) {
  std::map<ImageClassKey, std::vector<std::size_t>> m;
  for (std::size_t i = 0; i < gt.entries.size(); ++i) m[{gt.entries[i].image_id, gt.entries[i].class_id}].push_back(i);
  return m;
}

std::size_t count_truths(const GroundTruthSet& gt, std::optional<int> class_id) {
  if (!class_id) return gt.entries.size();
  return static_cast<std::size_t>(std::count_if(gt.entries.begin(), gt.entries.end(),
                                                [&](const GroundTruth& g) { return g.class_id == *class_id; }));
}

// Cumulative precision/recall over detections already in confidence order,
// one point per run of equal confidence.
std::vector<PRPoint> pr_points(const std::vector<double>& conf, const std::vector<bool>& tp, std::size_t npos) {
  std::vector<PRPoint> points;
  std::size_t ctp = 0;
  std::size_t cfp = 0;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    if (tp[i]) {
      ++ctp;
    } else {
      ++cfp;
    }
    if (i + 1 < conf.size() && conf[i + 1] == conf[i]) continue;
    const PrecisionRecall pr = precision_recall({ctp, cfp, npos - ctp});
    points.push_back({conf[i], pr.precision, pr.recall});
  }
  return points;
}

struct OrderedClassDetections {
  std::vector<double> conf;
  std::vector<bool> tp;
};

OrderedClassDetections ordered_for_class(const DetectionSet& det, const MatchResult& match,
                                         std::optional<int> class_id) {
  OrderedClassDetections out;
  for (std::size_t idx : match.order) {
    const Detection& d = det.entries[idx];
    if (class_id && d.class_id != *class_id) continue;
    out.conf.push_back(d.confidence);
    out.tp.push_back(match.det_tp[idx]);
  }
  return out;
}

}  // namespace

void GroundTruthSet::validate() const {
  for (const GroundTruth& g : entries) {
    if (g.class_id < 0) throw ValidationError("truth class id must be >= 0");
    if (!class_names.empty() && static_cast<std::size_t>(g.class_id) >= class_names.size()) {
      throw ValidationError("truth class id " + std::to_string(g.class_id) + " outside the class name table");
    }
  }
}

std::string GroundTruthSet::class_name(int class_id) const {
  if (class_id >= 0 && static_cast<std::size_t>(class_id) < class_names.size()) {
    return class_names[static_cast<std::size_t>(class_id)];
  }
  return std::to_string(class_id);
}

void DetectionSet::validate() const {
  for (const Detection& d : entries) {
    if (d.class_id < 0) throw ValidationError("detection class id must be >= 0");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      std::ostringstream os;
      os << "detection confidence " << d.confidence << " outside [0, 1]";
      throw ValidationError(os.str());
    }
  }
}

std::vector<std::size_t> confidence_order(const DetectionSet& det) {
  std::vector<std::size_t> order(det.entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return det.entries[a].confidence > det.entries[b].confidence;
  });
  return order;
}

MatchResult match_detections(const GroundTruthSet& gt, const DetectionSet& det, double iou_threshold) {
  check_unit_interval(iou_threshold, "iou_threshold");
  MatchResult m;
  m.det_tp.assign(det.entries.size(), false);
  m.gt_matched.assign(gt.entries.size(), false);
  m.order = confidence_order(det);
  const auto index = truths_by_image_class(gt);
  for (std::size_t di : m.order) {
    const Detection& d = det.entries[di];
    auto it = index.find({d.image_id, d.class_id});
    if (it == index.end()) continue;
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t gi : it->second) {
      if (m.gt_matched[gi]) continue;
      const double v = iou(d.box, gt.entries[gi].box);
      if (v > best_iou) {
        best_iou = v;
        best = gi;
      }
    }
    if (best && best_iou >= iou_threshold) {
      m.gt_matched[*best] = true;
      m.det_tp[di] = true;
    }
  }
  return m;
}

PrecisionRecall precision_recall(const Counts& c) {
  PrecisionRecall pr;
  const std::size_t truths = c.tp + c.fn;
  if (c.tp + c.fp == 0) {
    pr.precision = truths == 0 ? 1.0 : 0.0;
  } else {
    pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  pr.recall = truths == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(truths);
  return pr;
}

Counts tally(const GroundTruthSet& gt, const DetectionSet& det, const MatchResult& match,
             std::optional<int> class_id) {
  Counts c;
  std::size_t dets = 0;
  for (std::size_t i = 0; i < det.entries.size(); ++i) {
    if (class_id && det.entries[i].class_id != *class_id) continue;
    ++dets;
    if (match.det_tp[i]) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  std::size_t matched = 0;
  std::size_t truths = 0;
  for (std::size_t i = 0; i < gt.entries.size(); ++i) {
    if (class_id && gt.entries[i].class_id != *class_id) continue;
    ++truths;
    if (match.gt_matched[i]) {
      ++matched;
    } else {
      ++c.fn;
    }
  }
  if (matched != c.tp || c.tp + c.fn != truths || c.tp + c.fp != dets) {
    std::ostringstream os;
    os << "count identity violated";
    if (class_id) os << " for class " << *class_id;
    os << ": tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn << " truths=" << truths << " detections=" << dets
       << " matched_truths=" << matched;
    throw InvariantViolation(os.str());
  }
  return c;
}

std::string_view to_string(Interpolation i) { return i == Interpolation::AllPoints ? "all_points" : "101_point"; }

Interpolation parse_interpolation(std::string_view name) {
  if (name == "all_points" || name == "all-points" || name == "allpoints") return Interpolation::AllPoints;
  if (name == "101_point" || name == "101-point" || name == "n_point" || name == "101") return Interpolation::Point101;
  throw ValidationError("unknown interpolation '" + std::string(name) + "' (expected all_points|101_point)");
}

double integrate_pr(const std::vector<PRPoint>& points, Interpolation interp) {
  if (points.empty()) return 0.0;
  std::vector<double> envelope(points.size());
  double running = 0.0;
  for (std::size_t i = points.size(); i-- > 0;) {
    running = std::max(running, points[i].precision);
    envelope[i] = running;
  }
  if (interp == Interpolation::AllPoints) {
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      ap += (points[i].recall - prev_recall) * envelope[i];
      prev_recall = points[i].recall;
    }
    return ap;
  }
  double sum = 0.0;
  std::size_t i = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = static_cast<double>(k) / 100.0;
    while (i < points.size() && points[i].recall < r) ++i;
    if (i < points.size()) sum += envelope[i];
  }
  return sum / 101.0;
}

PRCurve average_precision(const GroundTruthSet& gt, const DetectionSet& det, const MatchResult& match, int class_id,
                          Interpolation interp) {
  PRCurve curve;
  curve.num_truths = count_truths(gt, class_id);
  if (curve.num_truths == 0) {
    throw UndefinedMetricError("AP undefined for class " + std::to_string(class_id) + ": no ground-truth boxes");
  }
  tally(gt, det, match, class_id);
  const OrderedClassDetections od = ordered_for_class(det, match, class_id);
  curve.num_detections = od.conf.size();
  curve.points = pr_points(od.conf, od.tp, curve.num_truths);
  curve.ap = std::clamp(integrate_pr(curve.points, interp), 0.0, 1.0);
  return curve;
}

PRCurve average_precision(const GroundTruthSet& gt, const DetectionSet& det, int class_id, double iou_threshold,
                          Interpolation interp) {
  return average_precision(gt, det, match_detections(gt, det, iou_threshold), class_id, interp);
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50.0 + 5.0 * i) / 100.0);
  return t;
}

double ClassAp::mean_ap() const {
  if (ap.empty()) return 0.0;
  double s = 0.0;
  for (double v : ap) s += v;
  return s / static_cast<double>(ap.size());
}

std::vector<int> class_ids(const GroundTruthSet& gt, const DetectionSet& det) {
  std::set<int> ids;
  for (const auto& g : gt.entries) ids.insert(g.class_id);
  for (const auto& d : det.entries) ids.insert(d.class_id);
  for (std::size_t i = 0; i < gt.class_names.size(); ++i) ids.insert(static_cast<int>(i));
  return {ids.begin(), ids.end()};
}

MapReport mean_ap(const GroundTruthSet& gt, const DetectionSet& det, const std::vector<double>& thresholds,
                  Interpolation interp) {
  if (thresholds.empty()) throw ValidationError("mean_ap needs at least one IoU threshold");
  for (double t : thresholds) check_unit_interval(t, "iou threshold");
  gt.validate();
  det.validate();
  MapReport report;
  report.thresholds = thresholds;
  for (int cls : class_ids(gt, det)) {
    const std::size_t truths = count_truths(gt, cls);
    if (truths == 0) {
      report.excluded_classes.push_back(cls);
      report.notes.push_back("class " + gt.class_name(cls) + " has no ground-truth boxes; excluded from mAP");
      continue;
    }
    ClassAp row;
    row.class_id = cls;
    row.name = gt.class_name(cls);
    row.truths = truths;
    row.detections = static_cast<std::size_t>(std::count_if(
        det.entries.begin(), det.entries.end(), [&](const Detection& d) { return d.class_id == cls; }));
    report.classes.push_back(std::move(row));
  }
  if (report.classes.empty()) throw UndefinedMetricError("mAP undefined: no class has ground-truth boxes");

  for (double t : thresholds) {
    const MatchResult match = match_detections(gt, det, t);
    tally(gt, det, match);
    double sum = 0.0;
    for (ClassAp& row : report.classes) {
      const PRCurve c = average_precision(gt, det, match, row.class_id, interp);
      row.ap.push_back(c.ap);
      sum += c.ap;
    }
    report.map_per_threshold.push_back(sum / static_cast<double>(report.classes.size()));
  }
  double total = 0.0;
  for (double m : report.map_per_threshold) total += m;
  report.map = total / static_cast<double>(report.map_per_threshold.size());
  return report;
}

std::size_t ConfusionMatrix::column_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p <= num_classes; ++p) s += at(p, truth);
  return s;
}

std::size_t ConfusionMatrix::row_sum(std::size_t pred) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t <= num_classes; ++t) s += at(pred, t);
  return s;
}

std::vector<double> ConfusionMatrix::column_normalized() const {
  const std::size_t n = num_classes + 1;
  std::vector<double> out(n * n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t total = column_sum(t);
    if (total == 0) continue;
    for (std::size_t p = 0; p < n; ++p) {
      out[p * n + t] = static_cast<double>(at(p, t)) / static_cast<double>(total);
    }
  }
  return out;
}

ConfusionMatrix confusion(const GroundTruthSet& gt, const DetectionSet& det, double iou_threshold,
                          double conf_threshold, std::size_t num_classes) {
  check_unit_interval(iou_threshold, "iou_threshold");
  check_unit_interval(conf_threshold, "conf_threshold");
  gt.validate();
  det.validate();
  std::size_t n = std::max(num_classes, gt.class_names.size());
  for (const auto& g : gt.entries) n = std::max(n, static_cast<std::size_t>(g.class_id) + 1);
  for (const auto& d : det.entries) n = std::max(n, static_cast<std::size_t>(d.class_id) + 1);

  ConfusionMatrix cm;
  cm.num_classes = n;
  cm.counts.assign((n + 1) * (n + 1), 0);

  std::map<std::string, std::vector<std::size_t>> truths_by_image;
  for (std::size_t i = 0; i < gt.entries.size(); ++i) truths_by_image[gt.entries[i].image_id].push_back(i);
  std::vector<bool> matched(gt.entries.size(), false);

  for (std::size_t di : confidence_order(det)) {
    const Detection& d = det.entries[di];
    if (d.confidence < conf_threshold) continue;
    const auto pred = static_cast<std::size_t>(d.class_id);
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    if (auto it = truths_by_image.find(d.image_id); it != truths_by_image.end()) {
      for (std::size_t gi : it->second) {
        if (matched[gi]) continue;
        const double v = iou(d.box, gt.entries[gi].box);
        if (v > best_iou) {
          best_iou = v;
          best = gi;
        }
      }
    }
    if (best && best_iou >= iou_threshold) {
      matched[*best] = true;
      ++cm.at(pred, static_cast<std::size_t>(gt.entries[*best].class_id));
    } else {
      ++cm.at(pred, cm.background());
    }
  }
  for (std::size_t gi = 0; gi < gt.entries.size(); ++gi) {
    if (!matched[gi]) ++cm.at(cm.background(), static_cast<std::size_t>(gt.entries[gi].class_id));
  }
  return cm;
}

namespace {

ClassCurves sweep_curves(const OrderedClassDetections& od, std::size_t truths, std::optional<int> class_id) {
  ClassCurves cc;
  cc.class_id = class_id;
  cc.truths = truths;

  std::vector<double> cuts;
  cuts.push_back(1.0);
  for (double c : od.conf) {
    if (cuts.back() != c) cuts.push_back(c);
  }
  if (cuts.back() != 0.0) cuts.push_back(0.0);

  std::size_t i = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (double cut : cuts) {
    while (i < od.conf.size() && od.conf[i] >= cut) {
      if (od.tp[i]) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    const PrecisionRecall pr = precision_recall({tp, fp, truths - tp});
    const double denom = pr.precision + pr.recall;
    cc.sweep.push_back({cut, pr.precision, pr.recall, denom > 0.0 ? 2.0 * pr.precision * pr.recall / denom : 0.0});
  }

  cc.pr.num_truths = truths;
  cc.pr.num_detections = od.conf.size();
  cc.pr.points = pr_points(od.conf, od.tp, truths);
  cc.pr.ap = truths == 0 ? 0.0 : std::clamp(integrate_pr(cc.pr.points, Interpolation::AllPoints), 0.0, 1.0);
  return cc;
}

}  // namespace

CurveBundle curve_bundle(const GroundTruthSet& gt, const DetectionSet& det, double iou_threshold) {
  gt.validate();
  det.validate();
  const MatchResult match = match_detections(gt, det, iou_threshold);
  CurveBundle bundle;
  for (int cls : class_ids(gt, det)) {
    tally(gt, det, match, cls);
    bundle.per_class.push_back(sweep_curves(ordered_for_class(det, match, cls), count_truths(gt, cls), cls));
  }
  tally(gt, det, match);
  bundle.aggregate = sweep_curves(ordered_for_class(det, match, std::nullopt), gt.entries.size(), std::nullopt);
  return bundle;
}

}  // namespace detgeom
