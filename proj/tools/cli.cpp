#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
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
#include "detgeom/run_config.hpp"
#include "detgeom/tensor_io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace detgeom::cli {

namespace {

constexpr double kInvolutionTolerance = 1e-6;

struct Session {
  RunConfig cfg;
  std::optional<std::string> config_text;  // verbatim --config contents
  bool quiet = false;
  std::ostream& out;
  std::ostream& err;

  void warn(const std::string& msg) const {
    if (!quiet) err << "warning: " << msg << "\n";
  }
};

double parse_number(std::string_view tok, const std::string& what) {
  while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
  while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ValidationError(what + ": '" + std::string(tok) + "' is not a finite number");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

// "cx,cy,w,h"
BBox parse_box(const std::string& text, const std::string& flag) {
  static const char* const kFields[] = {"cx", "cy", "w", "h"};
  auto parts = split(text, ',');
  if (parts.size() != 4) throw ValidationError(flag + ": expected cx,cy,w,h (got '" + text + "')");
  double v[4];
  for (std::size_t i = 0; i < 4; ++i) v[i] = parse_number(parts[i], flag + " field " + kFields[i]);
  if (!(v[2] > 0.0)) throw InvalidBoxError(flag + " field w: must be > 0");
  if (!(v[3] > 0.0)) throw InvalidBoxError(flag + " field h: must be > 0");
  return BBox(v[0], v[1], v[2], v[3]);
}

// "kind" or "kind:ratio"
LossSpec parse_loss_arg(const std::string& text, const LossSpec& base) {
  LossSpec spec = base;
  auto parts = split(text, ':');
  if (parts.size() > 2) throw ValidationError("--loss: expected kind[:ratio] (got '" + text + "')");
  spec.kind = parse_loss_kind(parts[0]);
  if (parts.size() == 2) spec.ratio = parse_number(parts[1], "--loss ratio");
  spec.validate();
  return spec;
}

std::string fmt(double v) { return format_double(v); }

void write_config_files(const Session& s, const fs::path& dir) {
  write_file_atomic(dir / "config.json", s.cfg.to_json_text());
  if (s.config_text) write_file_atomic(dir / "config.input.json", *s.config_text);
}

// loss-eval -------------------------------------------------------------

struct LossEvalArgs {
  std::string gt;
  std::string pred;
};

int cmd_loss_eval(Session& s, const LossEvalArgs& a) {
  BBox gt = parse_box(a.gt, "--gt");
  BBox pred = parse_box(a.pred, "--pred");
  const LossSpec& spec = s.cfg.loss;
  spec.validate();

  SIoUComponents c = siou_components(gt, pred, spec);
  LossResult r = evaluate_loss(gt, pred, spec, true);
  const Gradient& g = *r.grad;

  auto line = [&](const char* key, const std::string& value) {
    s.out << std::left << std::setw(12) << key << value << "\n";
  };
  line("kind", std::string(to_string(spec.kind)));
  line("ratio", fmt(spec.ratio));
  line("iou", fmt(iou(gt, pred)));
  line("lambda", fmt(c.lambda));
  line("gamma", fmt(c.gamma));
  line("delta", fmt(c.delta));
  line("omega", fmt(c.omega));
  line("iou_inner", fmt(inner_iou(gt, pred, spec.ratio)));
  line("loss", fmt(r.value));
  line("grad", fmt(g[0]) + " " + fmt(g[1]) + " " + fmt(g[2]) + " " + fmt(g[3]));
  line("non_smooth", r.non_smooth ? "true" : "false");
  return kExitOk;
}

// grad-check ------------------------------------------------------------

struct GradCheckArgs {
  std::string kind;  // "all": every kind, otherwise the configured loss
};

int cmd_grad_check(Session& s, const GradCheckArgs& a) {
  const GradCheckConfig& gc = s.cfg.gradcheck;
  std::vector<LossSpec> specs;
  if (a.kind == "all") {
    for (LossKind k : kAllLossKinds) {
      LossSpec spec = s.cfg.loss;
      spec.kind = k;
      specs.push_back(spec);
    }
  } else {
    specs.push_back(s.cfg.loss);
  }
  if (gc.samples == 0) s.warn("0 samples requested; the check passes vacuously");

  bool all_passed = true;
  for (const LossSpec& spec : specs) {
    GradCheckReport rep = run_grad_check(spec, gc.samples, s.cfg.seed, gc.tolerance, gc.step);
    all_passed = all_passed && rep.passed();
    s.out << std::left << std::setw(10) << to_string(spec.kind) << " samples=" << rep.samples
          << " checked=" << rep.checked << " skipped_non_smooth=" << rep.skipped_non_smooth
          << " worst_rel_error=" << fmt(rep.worst_rel_error) << " " << (rep.passed() ? "PASS" : "FAIL") << "\n";
    std::size_t shown = 0;
    for (const GradCheckFailure& f : rep.failures) {
      if (++shown > 10) {
        s.out << "  ... " << rep.failures.size() - 10 << " more\n";
        break;
      }
      s.out << "  gt=(" << fmt(f.gt.cx()) << "," << fmt(f.gt.cy()) << "," << fmt(f.gt.w()) << "," << fmt(f.gt.h())
            << ") pred=(" << fmt(f.pred.cx()) << "," << fmt(f.pred.cy()) << "," << fmt(f.pred.w()) << ","
            << fmt(f.pred.h()) << ") rel_error=" << fmt(f.rel_error) << "\n";
    }
  }
  return all_passed ? kExitOk : kExitRuntime;
}

// sim -------------------------------------------------------------------

int cmd_sim(Session& s) {
  const fs::path dir = s.cfg.paths.out_dir;
  SimConfig sim = s.cfg.sim;
  sim.seed = s.cfg.seed;
  sim.validate();
  ensure_output_dir(dir);
  ComparisonReport report = compare_losses(sim);

  json losses = json::array();
  for (const ConvergenceTrace& t : report.traces) {
    CsvWriter csv({"step", "loss_mean", "iou_mean"});
    for (std::size_t i = 0; i < t.loss_mean.size(); ++i) {
      csv.row({CsvWriter::cell(i), CsvWriter::cell(t.loss_mean[i]), CsvWriter::cell(t.iou_mean[i])});
    }
    const std::string file = "trace_" + t.label + ".csv";
    write_file_atomic(dir / file, csv.str());
    losses.push_back({{"label", t.label},
                      {"kind", to_string(t.spec.kind)},
                      {"ratio", t.spec.ratio},
                      {"shape_sign", to_string(t.spec.shape_sign)},
                      {"steps_to_threshold", t.steps_to_threshold ? json(*t.steps_to_threshold) : json(nullptr)},
                      {"mean_pair_steps", t.mean_pair_steps},
                      {"converged_pairs", t.converged_pairs},
                      {"final_loss", t.final_loss()},
                      {"final_iou", t.final_iou()},
                      {"area_under_loss", t.area_under_loss()},
                      {"trace_file", file}});
  }
  json summary{{"scenario", to_string(sim.scenario)},
               {"optimizer", to_string(sim.optimizer)},
               {"n_pairs", report.n_pairs},
               {"steps", sim.steps},
               {"stop_loss", sim.stop_loss},
               {"seed", sim.seed},
               {"losses", losses}};
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  write_config_files(s, dir);

  if (!s.quiet) {
    s.out << std::left << std::setw(22) << "loss" << std::setw(11) << "to_thresh" << std::setw(12) << "pair_steps"
          << std::setw(14) << "final_iou" << std::setw(14) << "final_loss" << "auc\n";
    for (const ConvergenceTrace& t : report.traces) {
      s.out << std::left << std::setw(22) << t.label << std::setw(11)
            << (t.steps_to_threshold ? std::to_string(*t.steps_to_threshold) : "-") << std::setw(12)
            << fmt(t.mean_pair_steps) << std::setw(14) << fmt(t.final_iou()) << std::setw(14) << fmt(t.final_loss())
            << fmt(t.area_under_loss()) << "\n";
    }
    s.out << "wrote " << dir.string() << "\n";
  }
  return kExitOk;
}

// eval ------------------------------------------------------------------

std::string class_label(const GroundTruthSet& gt, int id) {
  return id < static_cast<int>(gt.class_names.size()) ? gt.class_names[id] : std::to_string(id);
}

int cmd_eval(Session& s) {
  const PathsConfig& p = s.cfg.paths;
  const MetricsConfig& m = s.cfg.metrics;
  if (p.gt_dir.empty()) throw ValidationError("eval needs a ground-truth directory (--gt-dir or paths.gt_dir)");
  if (p.pred_file.empty()) throw ValidationError("eval needs a prediction file (--pred-file or paths.pred_file)");

  GroundTruthSet gt = load_ground_truth_dir(p.gt_dir);
  if (!p.names_file.empty()) gt.class_names = load_class_names(p.names_file);
  DetectionSet det = load_prediction_file(p.pred_file);
  gt.validate();
  det.validate();

  MapReport configured = mean_ap(gt, det, m.iou_thresholds, m.interpolation);
  MapReport coco = mean_ap(gt, det, coco_thresholds(), m.interpolation);
  MapReport at50 = mean_ap(gt, det, {0.5}, m.interpolation);
  MapReport at75 = mean_ap(gt, det, {0.75}, m.interpolation);

  const fs::path dir = p.out_dir;
  ensure_output_dir(dir);

  {
    CsvWriter csv({"class_id", "class", "truths", "detections", "ap50", "ap75", "ap50_95"});
    for (std::size_t i = 0; i < coco.classes.size(); ++i) {
      const ClassAp& c = coco.classes[i];
      csv.row({CsvWriter::cell(c.class_id), CsvWriter::cell(c.name), CsvWriter::cell(c.truths),
               CsvWriter::cell(c.detections), CsvWriter::cell(at50.classes[i].ap[0]),
               CsvWriter::cell(at75.classes[i].ap[0]), CsvWriter::cell(c.mean_ap())});
    }
    csv.row({"all", "all", "", "", CsvWriter::cell(at50.map), CsvWriter::cell(at75.map), CsvWriter::cell(coco.map)});
    write_file_atomic(dir / "ap_per_class.csv", csv.str());
  }
  {
    std::vector<std::string> header{"class_id", "class"};
    for (double t : configured.thresholds) header.push_back("ap@" + fmt(t));
    header.push_back("ap_mean");
    CsvWriter csv(header);
    for (const ClassAp& c : configured.classes) {
      std::vector<std::string> row{CsvWriter::cell(c.class_id), CsvWriter::cell(c.name)};
      for (double ap : c.ap) row.push_back(CsvWriter::cell(ap));
      row.push_back(CsvWriter::cell(c.mean_ap()));
      csv.row(row);
    }
    write_file_atomic(dir / "ap_per_threshold.csv", csv.str());
  }

  CurveBundle curves = curve_bundle(gt, det, m.curve_iou);
  {
    CsvWriter sweep({"class", "confidence", "precision", "recall", "f1"});
    CsvWriter pr({"class", "confidence", "precision", "recall"});
    auto emit = [&](const ClassCurves& cc) {
      std::string name = cc.class_id ? class_label(gt, *cc.class_id) : "all";
      for (const CurvePoint& q : cc.sweep) {
        sweep.row({CsvWriter::cell(name), CsvWriter::cell(q.confidence), CsvWriter::cell(q.precision),
                   CsvWriter::cell(q.recall), CsvWriter::cell(q.f1)});
      }
      for (const PRPoint& q : cc.pr.points) {
        pr.row({CsvWriter::cell(name), CsvWriter::cell(q.confidence), CsvWriter::cell(q.precision),
                CsvWriter::cell(q.recall)});
      }
    };
    for (const ClassCurves& cc : curves.per_class) emit(cc);
    emit(curves.aggregate);
    write_file_atomic(dir / "curves.csv", sweep.str());
    write_file_atomic(dir / "pr_curve.csv", pr.str());
  }

  ConfusionMatrix cm = confusion(gt, det, m.confusion_iou, m.conf_threshold);
  {
    std::vector<std::string> header{"pred\\true"};
    for (std::size_t t = 0; t < cm.num_classes; ++t) header.push_back(class_label(gt, static_cast<int>(t)));
    header.push_back("background");
    CsvWriter raw(header);
    CsvWriter norm(header);
    std::vector<double> frac = cm.column_normalized();
    const std::size_t n = cm.num_classes + 1;
    for (std::size_t pr = 0; pr < n; ++pr) {
      std::vector<std::string> r1{header[pr + 1]};
      std::vector<std::string> r2{header[pr + 1]};
      for (std::size_t t = 0; t < n; ++t) {
        r1.push_back(CsvWriter::cell(cm.at(pr, t)));
        r2.push_back(CsvWriter::cell(frac[pr * n + t]));
      }
      raw.row(r1);
      norm.row(r2);
    }
    write_file_atomic(dir / "confusion_matrix.csv", raw.str());
    write_file_atomic(dir / "confusion_matrix_normalized.csv", norm.str());
  }

  MatchResult match = match_detections(gt, det, 0.5);
  Counts total = tally(gt, det, match);
  json notes = json::array();
  for (const std::string& n : coco.notes) notes.push_back(n);
  json summary{{"map50", at50.map},
               {"map75", at75.map},
               {"map50_95", coco.map},
               {"interpolation", to_string(m.interpolation)},
               {"thresholds", configured.thresholds},
               {"map_per_threshold", configured.map_per_threshold},
               {"map_thresholds_mean", configured.map},
               {"classes_evaluated", coco.classes.size()},
               {"excluded_classes", coco.excluded_classes},
               {"truths", gt.entries.size()},
               {"detections", det.entries.size()},
               {"tp50", total.tp},
               {"fp50", total.fp},
               {"fn50", total.fn},
               {"notes", notes}};
  write_file_atomic(dir / "map_summary.json", summary.dump(2) + "\n");
  write_config_files(s, dir);

  for (const std::string& n : coco.notes) s.warn(n);
  if (!s.quiet) {
    s.out << "mAP@0.5       " << fmt(at50.map) << "\n"
          << "mAP@0.75      " << fmt(at75.map) << "\n"
          << "mAP@0.5:0.95  " << fmt(coco.map) << "\n"
          << "wrote " << dir.string() << "\n";
  }
  return kExitOk;
}

// involution-check ------------------------------------------------------

struct InvolutionArgs {
  std::string fixture;
  std::optional<std::uint64_t> random_seed;
  std::string dims = "1,4,5,5";
  std::size_t k = 3;
  std::size_t groups = 2;
  std::string save;
};

Shape4 parse_dims(const std::string& text) {
  auto parts = split(text, ',');
  if (parts.size() != 4) throw DimensionMismatchError("--dims: expected N,C,H,W (got '" + text + "')");
  std::size_t d[4];
  static const char* const kNames[] = {"N", "C", "H", "W"};
  for (std::size_t i = 0; i < 4; ++i) {
    auto [ptr, ec] = std::from_chars(parts[i].data(), parts[i].data() + parts[i].size(), d[i]);
    if (ec != std::errc() || ptr != parts[i].data() + parts[i].size() || d[i] == 0) {
      throw DimensionMismatchError(std::string("--dims: ") + kNames[i] + " must be a positive integer");
    }
  }
  return {d[0], d[1], d[2], d[3]};
}

int cmd_involution_check(Session& s, const InvolutionArgs& a) {
  InvolutionFixture fx{Tensor4(Shape4{1, 1, 1, 1}), InvolutionKernel(), std::nullopt};
  std::string source;
  if (!a.fixture.empty()) {
    fx = load_fixture(a.fixture);
    source = a.fixture;
  } else {
    const std::uint64_t seed = a.random_seed.value_or(s.cfg.seed);
    Shape4 shape = parse_dims(a.dims);
    if (a.k % 2 == 0) throw EvenKernelError("kernel size must be odd (got " + std::to_string(a.k) + ")");
    if (a.groups == 0) throw GroupMismatchError("groups must be >= 1");
    if (shape.c % a.groups != 0) {
      throw GroupMismatchError("channels not divisible by groups (C=" + std::to_string(shape.c) +
                               ", G=" + std::to_string(a.groups) + ")");
    }
    Rng rng(seed);
    std::vector<double> data(shape.n * shape.c * shape.h * shape.w);
    for (double& v : data) v = rng.uniform(-1.0, 1.0);
    fx.input = Tensor4(shape, std::move(data));
    fx.kernel = InvolutionKernel::random(1, shape.h, shape.w, a.k, a.groups, seed + 1);
    source = "random seed " + std::to_string(seed);
  }

  check_involution_args(fx.input.shape(), fx.kernel);
  Tensor4 fast = involute(fx.input, fx.kernel);
  Tensor4 oracle = involute_reference(fx.input, fx.kernel);
  double deviation = max_abs_difference(fast, oracle);
  std::optional<double> vs_expected;
  if (fx.expected) vs_expected = max_abs_difference(fast, *fx.expected);

  if (!a.save.empty()) {
    save_fixture(a.save, InvolutionFixture{fx.input, fx.kernel, oracle});
  }

  const Shape4 sh = fx.input.shape();
  bool pass = deviation < kInvolutionTolerance && (!vs_expected || *vs_expected < kInvolutionTolerance);
  s.out << "source              " << source << "\n"
        << "dims                " << sh.n << "," << sh.c << "," << sh.h << "," << sh.w << " K=" << fx.kernel.k()
        << " G=" << fx.kernel.groups() << "\n"
        << "max_abs_deviation   " << fmt(deviation) << "\n";
  if (vs_expected) s.out << "vs_expected         " << fmt(*vs_expected) << "\n";
  s.out << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitRuntime;
}

// layout ----------------------------------------------------------------

int cmd_layout(Session& s, const std::string& head) {
  const HeadLayout& layout = s.cfg.layout;
  layout.validate();
  if (!head.empty()) {
    std::vector<Point2> centers = grid_centers(layout, head);
    CsvWriter csv({"index", "cx", "cy"});
    for (std::size_t i = 0; i < centers.size(); ++i) {
      csv.row({CsvWriter::cell(i), CsvWriter::cell(centers[i].x), CsvWriter::cell(centers[i].y)});
    }
    s.out << csv.str();
    return kExitOk;
  }
  s.out << "input_size " << layout.input_size << "\n";
  s.out << std::left << std::setw(6) << "head" << std::setw(12) << "grid" << std::setw(8) << "stride"
        << std::setw(10) << "cells" << std::setw(14) << "first_center" << "last_center\n";
  for (const HeadSpec& h : layout.heads) {
    std::vector<Point2> c = grid_centers(layout, h.name);
    s.out << std::left << std::setw(6) << h.name << std::setw(12)
          << (std::to_string(h.grid_h) + "x" + std::to_string(h.grid_w)) << std::setw(8) << h.stride
          << std::setw(10) << c.size() << std::setw(14) << ("(" + fmt(c.front().x) + "," + fmt(c.front().y) + ")")
          << "(" << fmt(c.back().x) << "," << fmt(c.back().y) << ")\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const CLI::Validator positive(
      [](std::string& v) -> std::string {
        double d = 0.0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
        if (ec != std::errc() || ptr != v.data() + v.size() || !(d > 0.0) || !std::isfinite(d)) {
          return "must be a number > 0 (got " + v + ")";
        }
        return {};
      },
      "> 0");

  CLI::App app{"Box-regression loss geometry and detection evaluation toolkit", "detgeom"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory (overrides paths.out_dir)");
  app.add_flag("--quiet,-q", quiet, "Suppress progress output and warnings");

  std::optional<std::string> kind;
  std::optional<double> ratio;
  std::optional<double> theta;
  std::optional<double> epsilon;
  std::optional<std::string> shape_sign;
  auto add_loss_options = [&](CLI::App* sub) {
    sub->add_option("--kind", kind, "Loss kind (iou, giou, diou, ciou, eiou, siou, inner_iou, sib_iou)");
    sub->add_option("--ratio", ratio, "Inner-box ratio in [0.5, 1.5]");
    sub->add_option("--theta", theta, "Shape-cost exponent");
    sub->add_option("--epsilon", epsilon, "Angle-cost denominator guard");
    sub->add_option("--shape-sign", shape_sign, "Shape-cost exponent sign: corrected or as_printed");
  };

  LossEvalArgs loss_args;
  CLI::App* loss_eval = app.add_subcommand("loss-eval", "Print the loss breakdown for one box pair");
  loss_eval->add_option("--gt", loss_args.gt, "Ground-truth box cx,cy,w,h")->required();
  loss_eval->add_option("--pred", loss_args.pred, "Predicted box cx,cy,w,h")->required();
  add_loss_options(loss_eval);

  GradCheckArgs gc_args;
  std::optional<std::size_t> gc_samples;
  std::optional<double> gc_tol;
  std::optional<double> gc_step;
  CLI::App* grad_check = app.add_subcommand("grad-check", "Compare analytic and finite-difference gradients");
  add_loss_options(grad_check);
  grad_check->add_option("--samples,-n", gc_samples, "Number of random box pairs");
  grad_check->add_option("--tolerance", gc_tol, "Relative error tolerance (> 0)")->check(positive);
  grad_check->add_option("--step", gc_step, "Finite-difference step (> 0)")->check(positive);

  std::optional<std::string> scenario;
  std::optional<std::size_t> n_pairs;
  std::optional<std::size_t> steps;
  std::optional<double> lr;
  std::optional<double> lr_decay;
  std::optional<std::string> optimizer;
  std::vector<std::string> sim_losses;
  CLI::App* sim = app.add_subcommand("sim", "Run the synthetic box-regression comparison");
  sim->add_option("--scenario", scenario, "uniform_random, high_iou_start, low_iou_start, axis_aligned_offset");
  sim->add_option("--n-pairs", n_pairs, "Number of (gt, anchor) pairs");
  sim->add_option("--steps", steps, "Gradient steps");
  sim->add_option("--lr", lr, "Step size");
  sim->add_option("--lr-decay", lr_decay, "Multiplicative step-size decay");
  sim->add_option("--optimizer", optimizer, "sgd or adam");
  sim->add_option("--loss", sim_losses, "Loss to compare, kind[:ratio]; repeatable");

  std::optional<std::string> gt_dir;
  std::optional<std::string> pred_file;
  std::optional<std::string> names_file;
  std::vector<double> thresholds;
  std::optional<std::string> interp;
  std::optional<double> conf_threshold;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate predictions against YOLO-format labels");
  eval->add_option("--gt-dir", gt_dir, "Directory of per-image label files");
  eval->add_option("--pred-file", pred_file, "Prediction file (image_id class_id cx cy w h confidence)");
  eval->add_option("--names", names_file, "Class names, one per line");
  eval->add_option("--thresholds", thresholds, "IoU thresholds for the per-threshold table");
  eval->add_option("--interp", interp, "all_points or 101_point");
  eval->add_option("--conf", conf_threshold, "Confusion-matrix confidence threshold");

  InvolutionArgs inv_args;
  CLI::App* inv = app.add_subcommand("involution-check", "Compare involute against the direct loop evaluation");
  auto* fixture_opt = inv->add_option("--fixture", inv_args.fixture, "Fixture file (tensor, kernel, expected)");
  inv->add_option("--random", inv_args.random_seed, "Random input and kernel from this seed")->excludes(fixture_opt);
  inv->add_option("--dims", inv_args.dims, "N,C,H,W for --random");
  inv->add_option("--k", inv_args.k, "Kernel size for --random");
  inv->add_option("--groups", inv_args.groups, "Groups for --random");
  inv->add_option("--save", inv_args.save, "Write the checked case as a fixture");

  std::string layout_head;
  CLI::App* layout = app.add_subcommand("layout", "Print the detection-head grids");
  layout->add_option("--head", layout_head, "Print every cell center of this head as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    Session s{RunConfig{}, std::nullopt, quiet, out, err};
    if (!config_path.empty()) {
      s.config_text = read_file(config_path);
      s.cfg = RunConfig::from_json_text(*s.config_text, config_path);
    }
    RunConfig& c = s.cfg;
    if (seed) c.seed = *seed;
    if (!out_dir.empty()) c.paths.out_dir = out_dir;

    if (kind && grad_check->parsed() && *kind == "all") {
      gc_args.kind = "all";
    } else if (kind) {
      c.loss.kind = parse_loss_kind(*kind);
    }
    if (ratio) c.loss.ratio = *ratio;
    if (theta) c.loss.theta = *theta;
    if (epsilon) c.loss.epsilon = *epsilon;
    if (shape_sign) c.loss.shape_sign = parse_shape_sign(*shape_sign);
    if (gc_samples) c.gradcheck.samples = *gc_samples;
    if (gc_tol) c.gradcheck.tolerance = *gc_tol;
    if (gc_step) c.gradcheck.step = *gc_step;

    if (scenario) c.sim.scenario = parse_scenario(*scenario);
    if (n_pairs) c.sim.n_pairs = *n_pairs;
    if (steps) c.sim.steps = *steps;
    if (lr) c.sim.lr = *lr;
    if (lr_decay) c.sim.lr_decay = *lr_decay;
    if (optimizer) c.sim.optimizer = parse_optimizer(*optimizer);
    if (!sim_losses.empty()) {
      c.sim.losses.clear();
      for (const std::string& l : sim_losses) c.sim.losses.push_back(parse_loss_arg(l, c.loss));
    }
    c.sim.seed = c.seed;

    if (gt_dir) c.paths.gt_dir = *gt_dir;
    if (pred_file) c.paths.pred_file = *pred_file;
    if (names_file) c.paths.names_file = *names_file;
    if (!thresholds.empty()) c.metrics.iou_thresholds = thresholds;
    if (interp) c.metrics.interpolation = parse_interpolation(*interp);
    if (conf_threshold) c.metrics.conf_threshold = *conf_threshold;
    c.validate();

    if (loss_eval->parsed()) return cmd_loss_eval(s, loss_args);
    if (grad_check->parsed()) return cmd_grad_check(s, gc_args);
    if (sim->parsed()) return cmd_sim(s);
    if (eval->parsed()) return cmd_eval(s);
    if (inv->parsed()) return cmd_involution_check(s, inv_args);
    if (layout->parsed()) return cmd_layout(s, layout_head);
    err << "error: no subcommand\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const RuntimeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace detgeom::cli
