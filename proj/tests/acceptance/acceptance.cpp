// Acceptance run: one PASS/FAIL line per criterion. `--only N` runs a single
// criterion; the exit code is non-zero when any criterion that ran failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "detgeom/csv.hpp"
#include "detgeom/detect_geom.hpp"
#include "detgeom/error.hpp"
#include "detgeom/gradcheck.hpp"
#include "detgeom/involution.hpp"
#include "detgeom/label_io.hpp"
#include "detgeom/losses.hpp"
#include "detgeom/metrics.hpp"
#include "detgeom/random.hpp"
#include "detgeom/regression_sim.hpp"
#include "oracles.hpp"

using namespace detgeom;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = DETGEOM_FIXTURE_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

oracle::Box ob(const BBox& b) { return {b.cx(), b.cy(), b.w(), b.h()}; }

double rel_diff(double a, double b) { return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300}); }

std::string fmt(double v) { return format_double(v); }

std::vector<std::pair<BBox, BBox>> random_pairs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<BBox, BBox>> out;
  while (out.size() < n) {
    const BBox g(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.02, 0.4), rng.uniform(0.02, 0.4));
    const BBox p(g.cx() + rng.uniform(-0.3, 0.3), g.cy() + rng.uniform(-0.3, 0.3), rng.uniform(0.02, 0.4),
                 rng.uniform(0.02, 0.4));
    out.emplace_back(g, p);
  }
  return out;
}

LossSpec spec_of(LossKind kind, double ratio = 1.15) {
  LossSpec s;
  s.kind = kind;
  s.ratio = ratio;
  return s;
}

Verdict loss_exactness() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  const LossSpec siou = spec_of(LossKind::SIoU);
  const LossSpec sib = spec_of(LossKind::SIB_IoU);
  for (const auto& [g, p] : random_pairs(1000, 101)) {
    worst = std::max(worst, rel_diff(siou_loss(g, p, siou).value, oracle::siou(ob(g), ob(p))));
    worst = std::max(worst, rel_diff(inner_iou(g, p, 1.15), oracle::inner_iou(ob(g), ob(p), 1.15)));
    worst = std::max(worst, rel_diff(sib_iou_loss(g, p, sib).value, oracle::sib_iou(ob(g), ob(p), 1.15)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-12 && secs < 5.0,
          "1000 pairs, worst relative deviation " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Verdict reduction_identity() {
  double worst = 0.0;
  const LossSpec siou = spec_of(LossKind::SIoU);
  const LossSpec sib = spec_of(LossKind::SIB_IoU, 1.0);
  for (const auto& [g, p] : random_pairs(1000, 101)) {
    worst = std::max(worst, std::fabs(sib_iou_loss(g, p, sib).value - siou_loss(g, p, siou).value));
  }
  return {worst <= 1e-12, "1000 pairs, worst |SIB(1) - SIoU| " + fmt(worst)};
}

Verdict gradients() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream os;
  for (LossKind k : kAllLossKinds) {
    const GradCheckReport r = run_grad_check(spec_of(k), 1000, 2024, 1e-4, 1e-6);
    ok = ok && r.passed();
    os << to_string(k) << " " << r.checked << "/" << r.samples << " worst " << fmt(r.worst_rel_error) << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  os << fmt(secs) << " s";
  return {ok && secs < 30.0, os.str()};
}

Verdict angle_anchors() {
  double worst_diag = 0.0;
  double worst_axis = 0.0;
  const BBox g(0.5, 0.5, 0.2, 0.3);
  for (double d : {0.05, 0.1, 0.2, 0.3}) {
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        const BBox diag(0.5 + sx * d, 0.5 + sy * d, 0.25, 0.1);
        worst_diag = std::max(worst_diag, std::fabs(angle_cost(g, diag, 1e-7) - 1.0));
      }
      worst_axis = std::max(worst_axis, std::fabs(angle_cost(g, BBox(0.5 + sx * d, 0.5, 0.1, 0.2), 1e-7)));
      worst_axis = std::max(worst_axis, std::fabs(angle_cost(g, BBox(0.5, 0.5 + sx * d, 0.1, 0.2), 1e-7)));
    }
  }
  return {worst_diag <= 1e-9 && worst_axis <= 1e-9,
          "max |Lambda - 1| at 45 deg " + fmt(worst_diag) + ", max |Lambda| on axes " + fmt(worst_axis)};
}

std::string trace_summary(const ConvergenceTrace& t) {
  std::ostringstream os;
  os << t.label << " mean_steps=" << fmt(t.mean_pair_steps) << " to_threshold="
     << (t.steps_to_threshold ? std::to_string(*t.steps_to_threshold) : std::string("none"))
     << " final_iou=" << fmt(t.final_iou());
  return os.str();
}

Verdict convergence() {
  const auto start = std::chrono::steady_clock::now();
  SimConfig c;
  c.losses = {spec_of(LossKind::SIB_IoU, 1.15), spec_of(LossKind::CIoU)};
  const ComparisonReport r = compare_losses(c);
  const ConvergenceTrace& sib = r.traces[0];
  const ConvergenceTrace& ciou = r.traces[1];
  const bool fewer = sib.mean_pair_steps < ciou.mean_pair_steps;
  std::size_t dominated = 0;
  std::size_t window = 0;
  for (std::size_t s = 50; s < c.steps; ++s) {
    ++window;
    if (sib.iou_mean[s] >= ciou.iou_mean[s]) ++dominated;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os << trace_summary(sib) << "; " << trace_summary(ciou) << "; IoU dominance from step 50: " << dominated << "/"
     << window << " steps; " << fmt(secs) << " s";
  return {fewer && dominated == window && secs < 60.0, os.str()};
}

Verdict ratio_regimes() {
  SimConfig c;
  c.losses = {spec_of(LossKind::SIB_IoU, 0.7), spec_of(LossKind::SIB_IoU, 1.3)};
  c.scenario = Scenario::HighIouStart;
  const ComparisonReport high = compare_losses(c);
  c.scenario = Scenario::LowIouStart;
  const ComparisonReport low = compare_losses(c);
  const bool high_ok = high.traces[0].mean_pair_steps < high.traces[1].mean_pair_steps;
  const bool low_ok = low.traces[1].final_iou() >= low.traces[0].final_iou();
  std::ostringstream os;
  os << "high_iou_start " << (high_ok ? "ok" : "not met") << ": " << trace_summary(high.traces[0]) << " vs "
     << trace_summary(high.traces[1]) << "; low_iou_start " << (low_ok ? "ok" : "not met") << ": "
     << trace_summary(low.traces[1]) << " vs " << trace_summary(low.traces[0]);
  return {high_ok && low_ok, os.str()};
}

Verdict involution_oracle() {
  Rng rng(77);
  const std::size_t ks[] = {1, 3, 5};
  const std::size_t gs[] = {1, 2, 4};
  const std::size_t cs[] = {2, 4, 8};
  double worst = 0.0;
  std::size_t configs = 0;
  bool identity_ok = true;
  while (configs < 50) {
    const std::size_t K = ks[rng.below(3)];
    const std::size_t G = gs[rng.below(3)];
    const std::size_t C = cs[rng.below(3)];
    if (C % G != 0) continue;
    const Shape4 s{1 + rng.below(2), C, 3 + rng.below(6), 3 + rng.below(6)};
    std::vector<double> data(s.size());
    for (double& v : data) v = rng.uniform(-1.0, 1.0);
    const Tensor4 x(s, std::move(data));
    const InvolutionKernel k = InvolutionKernel::random(s.n, s.h, s.w, K, G, rng.next());
    worst = std::max(worst, max_abs_difference(involute(x, k), oracle::involution(x, k)));
    identity_ok = identity_ok && involute(x, InvolutionKernel::delta(s.h, s.w, K, G)) == x;
    ++configs;
  }
  return {worst <= 1e-6 && identity_ok, std::to_string(configs) + " configurations, max |deviation| " + fmt(worst) +
                                            ", delta kernels exact: " + (identity_ok ? "yes" : "no")};
}

struct Dataset {
  GroundTruthSet gt;
  DetectionSet det;
};

Dataset load(const std::string& name, const std::string& preds = "predictions.txt") {
  return {load_ground_truth_dir(kFixtures / name / "labels"), load_prediction_file(kFixtures / name / preds)};
}

Verdict metric_exactness() {
  std::size_t compared = 0;
  std::size_t mismatched = 0;
  for (const char* name : {"micro", "two_truth", "perfect"}) {
    const Dataset d = load(name);
    std::vector<double> thresholds = coco_thresholds();
    thresholds.push_back(0.3);
    for (double t : thresholds) {
      for (const ClassAp& row : mean_ap(d.gt, d.det, {t}).classes) {
        ++compared;
        if (average_precision(d.gt, d.det, row.class_id, t).ap !=
            oracle::average_precision(d.gt, d.det, row.class_id, t)) {
          ++mismatched;
        }
      }
    }
  }
  const Dataset two = load("two_truth");
  const double two_ap = average_precision(two.gt, two.det, 0, 0.5).ap;
  const std::vector<double> coco = coco_thresholds();
  bool grid_ok = coco.size() == 10;
  for (std::size_t i = 0; grid_ok && i < coco.size(); ++i) grid_ok = std::fabs(coco[i] - (0.5 + 0.05 * i)) < 1e-15;
  const MapReport micro = mean_ap(load("micro").gt, load("micro").det, coco);
  grid_ok = grid_ok && micro.map_per_threshold.size() == 10;
  return {mismatched == 0 && two_ap == 0.5 && grid_ok,
          std::to_string(compared - mismatched) + "/" + std::to_string(compared) +
              " (class, threshold) APs equal the cut-point oracle exactly; two-truth AP " + fmt(two_ap) +
              "; mAP@0.5:0.95 thresholds " + (grid_ok ? "0.50..0.95 x10" : "wrong")};
}

Verdict count_identities() {
  std::size_t runs = 0;
  std::size_t violations = 0;
  auto check = [&](const GroundTruthSet& gt, const DetectionSet& det) {
    for (double t : coco_thresholds()) {
      const MatchResult m = match_detections(gt, det, t);
      for (int cls : class_ids(gt, det)) {
        std::size_t truths = 0, dets = 0, tp = 0, fn = 0, fp = 0;
        for (std::size_t i = 0; i < gt.entries.size(); ++i) {
          if (gt.entries[i].class_id != cls) continue;
          ++truths;
          fn += !m.gt_matched[i];
        }
        for (std::size_t i = 0; i < det.entries.size(); ++i) {
          if (det.entries[i].class_id != cls) continue;
          ++dets;
          tp += m.det_tp[i];
          fp += !m.det_tp[i];
        }
        const Counts c = tally(gt, det, m, cls);
        if (tp + fn != truths || tp + fp != dets || c.tp != tp || c.fp != fp || c.fn != fn) ++violations;
      }
    }
    mean_ap(gt, det, coco_thresholds());
    curve_bundle(gt, det, 0.5);
    ++runs;
  };
  for (const char* name : {"micro", "two_truth", "perfect"}) {
    const Dataset d = load(name);
    check(d.gt, d.det);
  }
  Rng rng(5);
  for (int n = 0; n < 100; ++n) {
    Dataset d;
    for (int img = 0; img < 5; ++img) {
      const std::string id = "im" + std::to_string(img);
      for (std::size_t i = rng.below(6); i > 0; --i) {
        const BBox b(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3));
        const int cls = static_cast<int>(rng.below(3));
        d.gt.entries.push_back({id, cls, b});
        for (std::size_t j = rng.below(3); j > 0; --j) {
          d.det.entries.push_back({id, rng.uniform() < 0.8 ? cls : static_cast<int>(rng.below(3)),
                                   BBox(b.cx() + rng.uniform(-0.05, 0.05), b.cy() + rng.uniform(-0.05, 0.05), b.w(),
                                        b.h()),
                                   std::round(rng.uniform() * 10.0) / 10.0});
        }
      }
    }
    if (d.gt.entries.empty()) continue;
    check(d.gt, d.det);
  }
  // The check is live: corrupt a match and expect the library to refuse it.
  const Dataset two = load("two_truth");
  MatchResult bad = match_detections(two.gt, two.det, 0.5);
  bad.gt_matched.assign(bad.gt_matched.size(), true);
  bool caught = false;
  try {
    tally(two.gt, two.det, bad);
  } catch (const InvariantViolation&) {
    caught = true;
  }
  return {violations == 0 && caught, std::to_string(runs) + " evaluation runs, " + std::to_string(violations) +
                                         " identity violations; corrupted match rejected: " + (caught ? "yes" : "no")};
}

Verdict nms_correctness() {
  Rng rng(11);
  std::size_t mismatched = 0;
  std::size_t not_idempotent = 0;
  for (int img = 0; img < 500; ++img) {
    std::vector<ScoredBox> d;
    std::vector<oracle::Scored> o;
    const std::size_t n = 1 + rng.below(50);
    for (std::size_t i = 0; i < n; ++i) {
      const BBox b(rng.uniform(50, 590), rng.uniform(50, 590), rng.uniform(10, 150), rng.uniform(10, 150));
      const int cls = static_cast<int>(rng.below(4));
      const double conf = static_cast<double>(rng.below(20)) / 20.0;
      d.push_back({b, cls, conf});
      o.push_back({ob(b), cls, conf});
    }
    const std::vector<ScoredBox> kept = nms(d, 0.45);
    const std::vector<std::size_t> want = oracle::nms(o, 0.45, false);
    bool same = kept.size() == want.size();
    for (std::size_t i = 0; same && i < kept.size(); ++i) same = kept[i].box == d[want[i]].box;
    mismatched += !same;
    const std::vector<ScoredBox> again = nms(kept, 0.45);
    bool idem = again.size() == kept.size();
    for (std::size_t i = 0; idem && i < kept.size(); ++i) idem = again[i].box == kept[i].box;
    not_idempotent += !idem;
  }
  return {mismatched == 0 && not_idempotent == 0, "500 images, " + std::to_string(mismatched) +
                                                      " oracle mismatches, " + std::to_string(not_idempotent) +
                                                      " not idempotent"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files[e.path().filename().string()] = read_file(e.path());
  }
  return files;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "detgeom");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "detgeom_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> sim = {"-q",   "--seed", "3",    "--out",      (root / "sim").string(),
                                        "sim",  "--loss", "ciou", "--loss",     "sib_iou:1.15",
                                        "--loss", "siou"};
  const std::vector<std::string> eval = {"-q", "--out", (root / "eval").string(), "eval", "--gt-dir",
                                         (kFixtures / "micro" / "labels").string(), "--pred-file",
                                         (kFixtures / "micro" / "predictions.txt").string(), "--names",
                                         (kFixtures / "micro" / "names.txt").string()};
  std::size_t files = 0;
  std::size_t differing = 0;
  bool ran = true;
  for (const auto* args : {&sim, &eval}) {
    const fs::path dir = args == &sim ? root / "sim" : root / "eval";
    ran = ran && run_cli(*args) == cli::kExitOk;
    const auto first = snapshot(dir);
    ran = ran && run_cli(*args) == cli::kExitOk;
    const auto second = snapshot(dir);
    files += first.size();
    differing += first != second;
  }
  fs::remove_all(root);
  return {ran && files > 0 && differing == 0,
          "sim and eval rerun: " + std::to_string(files) + " artifacts, " +
              (differing == 0 ? std::string("byte-identical") : std::string("differences found"))};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: detgeom_acceptance [--only N]\n";
      return 2;
    }
  }
  const std::vector<Criterion> criteria = {
      {1, "loss formula exactness", loss_exactness},
      {2, "reduction identity", reduction_identity},
      {3, "gradient correctness", gradients},
      {4, "angle-cost anchors", angle_anchors},
      {5, "convergence reproduction", convergence},
      {6, "ratio-regime behavior", ratio_regimes},
      {7, "involution oracle", involution_oracle},
      {8, "metric exactness", metric_exactness},
      {9, "count identities", count_identities},
      {10, "NMS correctness", nms_correctness},
      {11, "determinism", determinism},
  };
  int failed = 0;
  int ran = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s  %2d  %-26s %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
  }
  if (ran == 0) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
