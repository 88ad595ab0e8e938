#include <gtest/gtest.h>

#include <cmath>

#include "detgeom/error.hpp"
#include "detgeom/regression_sim.hpp"

using namespace detgeom;

namespace {

LossSpec spec_of(LossKind kind, double ratio = 1.15) {
  LossSpec s;
  s.kind = kind;
  s.ratio = ratio;
  return s;
}

SimConfig small_config(Scenario sc = Scenario::UniformRandom) {
  SimConfig c;
  c.scenario = sc;
  c.n_pairs = 40;
  c.steps = 60;
  c.seed = 17;
  return c;
}

bool same_pairs(const std::vector<BoxPair>& a, const std::vector<BoxPair>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].gt == b[i].gt) || !(a[i].anchor == b[i].anchor)) return false;
  }
  return true;
}

}  // namespace

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_pairs = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = SimConfig{};
  c.steps = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = SimConfig{};
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = SimConfig{};
  c.lr_decay = 1.2;
  EXPECT_THROW(c.validate(), ValidationError);
  c = SimConfig{};
  c.lr_decay = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(SimConfig, DefaultsEchoTrainingSetup) {
  SimConfig c;
  EXPECT_EQ(c.steps, 300u);
  EXPECT_EQ(c.n_pairs, 200u);
  EXPECT_EQ(c.stop_loss, 0.05);
  EXPECT_EQ(c.optimizer, Optimizer::Sgd);
  EXPECT_EQ(c.adam_beta1, 0.937);
  ASSERT_EQ(c.losses.size(), 2u);
  EXPECT_EQ(c.losses[1].ratio, 1.15);
}

TEST(GeneratePairs, DeterministicPerSeed) {
  SimConfig c = small_config();
  EXPECT_TRUE(same_pairs(generate_pairs(c), generate_pairs(c)));
  SimConfig d = c;
  d.seed = 18;
  EXPECT_FALSE(same_pairs(generate_pairs(c), generate_pairs(d)));
}

TEST(GeneratePairs, ScenarioConstraints) {
  SimConfig c = small_config(Scenario::HighIouStart);
  c.n_pairs = 100;
  for (const BoxPair& p : generate_pairs(c)) EXPECT_GE(iou(p.gt, p.anchor), 0.6);

  c.scenario = Scenario::LowIouStart;
  for (const BoxPair& p : generate_pairs(c)) {
    EXPECT_GT(iou(p.gt, p.anchor), 0.0);
    EXPECT_LE(iou(p.gt, p.anchor), 0.2);
  }

  c.scenario = Scenario::UniformRandom;
  for (const BoxPair& p : generate_pairs(c)) EXPECT_GT(iou(p.gt, p.anchor), 0.0);

  c.scenario = Scenario::AxisAlignedOffset;
  for (const BoxPair& p : generate_pairs(c)) {
    EXPECT_TRUE(p.gt.cx() == p.anchor.cx() || p.gt.cy() == p.anchor.cy());
  }
}

TEST(GeneratePairs, UnsatisfiableScenarioIsReported) {
  SimConfig c = small_config(Scenario::HighIouStart);
  c.n_pairs = 200;
  c.max_attempts = 1;
  EXPECT_THROW(generate_pairs(c), ScenarioUnsatisfiableError);
}

TEST(RunDescent, AnchorAtGroundTruthStaysConverged) {
  BoxPair p{BBox(0.4, 0.5, 0.2, 0.1), BBox(0.4, 0.5, 0.2, 0.1)};
  SimConfig c = small_config();
  for (LossKind k : kAllLossKinds) {
    ConvergenceTrace t = run_descent(std::span(&p, 1), spec_of(k), c);
    ASSERT_EQ(t.loss_mean.size(), c.steps);
    for (double v : t.loss_mean) EXPECT_EQ(v, 0.0);
    for (double v : t.iou_mean) EXPECT_EQ(v, 1.0);
    ASSERT_TRUE(t.steps_to_threshold.has_value());
    EXPECT_EQ(*t.steps_to_threshold, 0u);
  }
}

TEST(RunDescent, PlainIouIsStuckOnDisjointBoxes) {
  BoxPair p{BBox(0.2, 0.2, 0.1, 0.1), BBox(0.7, 0.6, 0.1, 0.2)};
  ConvergenceTrace t = run_descent(std::span(&p, 1), spec_of(LossKind::IoU), small_config());
  for (double v : t.loss_mean) EXPECT_EQ(v, 1.0);
  EXPECT_FALSE(t.steps_to_threshold.has_value());

  ConvergenceTrace d = run_descent(std::span(&p, 1), spec_of(LossKind::DIoU), small_config());
  EXPECT_LT(d.loss_mean.back(), d.loss_mean.front());
}

TEST(RunDescent, SmallStepsDescendExceptAcrossKinks) {
  SimConfig c = small_config();
  c.n_pairs = 30;
  c.lr = 1e-3;
  c.lr_decay = 1.0;
  const std::vector<BoxPair> pairs = generate_pairs(c);
  for (LossKind k : {LossKind::GIoU, LossKind::DIoU, LossKind::CIoU, LossKind::SIoU, LossKind::SIB_IoU}) {
    const LossSpec spec = spec_of(k);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      // Replays the simulator's update to see where each step lands.
      std::array<double, 4> q = {pairs[i].anchor.cx(), pairs[i].anchor.cy(), pairs[i].anchor.w(),
                                 pairs[i].anchor.h()};
      ConvergenceTrace t = run_descent(std::span(&pairs[i], 1), spec, c);
      for (std::size_t s = 0; s + 1 < c.steps; ++s) {
        const BBox cur(q[0], q[1], q[2], q[3]);
        const LossResult r = evaluate_loss(pairs[i].gt, cur, spec);
        ASSERT_EQ(r.value, t.loss_mean[s]);
        double move = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
          q[j] -= c.lr * (*r.grad)[j];
          move = std::max(move, std::fabs(c.lr * (*r.grad)[j]));
        }
        q[2] = std::max(q[2], kMinBoxSide);
        q[3] = std::max(q[3], kMinBoxSide);
        if (t.loss_mean[s + 1] > t.loss_mean[s] + 1e-12) {
          EXPECT_LE(r.smooth_margin, 2.0 * move)
              << to_string(k) << " pair " << i << " step " << s << " rose from " << t.loss_mean[s] << " to "
              << t.loss_mean[s + 1] << " away from any kink";
        }
      }
    }
  }
}

TEST(RunDescent, SmoothEnclosingLossesConvergeAtDefaults) {
  SimConfig c;
  c.losses = {spec_of(LossKind::GIoU), spec_of(LossKind::DIoU), spec_of(LossKind::CIoU), spec_of(LossKind::SIoU),
              spec_of(LossKind::SIB_IoU)};
  ComparisonReport r = compare_losses(c);
  for (const ConvergenceTrace& t : r.traces) {
    EXPECT_GT(t.final_iou(), 0.95) << t.label;
    for (double v : t.iou_mean) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(t.loss_mean.size(), c.steps);
  }
}

TEST(RunDescent, AdamOptionRuns) {
  SimConfig c = small_config();
  c.optimizer = Optimizer::Adam;
  c.lr = 0.003;
  ComparisonReport r = compare_losses(c);
  for (const ConvergenceTrace& t : r.traces) EXPECT_GT(t.final_iou(), t.iou_mean.front());
}

TEST(CompareLosses, RepeatedLossGivesIdenticalTraces) {
  SimConfig c = small_config();
  c.losses = {spec_of(LossKind::CIoU), spec_of(LossKind::CIoU)};
  ComparisonReport r = compare_losses(c);
  ASSERT_EQ(r.traces.size(), 2u);
  EXPECT_EQ(r.traces[0].loss_mean, r.traces[1].loss_mean);
  EXPECT_EQ(r.traces[0].iou_mean, r.traces[1].iou_mean);
  EXPECT_NE(r.traces[0].label, r.traces[1].label);
}

TEST(CompareLosses, AllKindsReportShape) {
  SimConfig c = small_config();
  c.losses = {};
  for (LossKind k : kAllLossKinds) c.losses.push_back(spec_of(k));
  ComparisonReport r = compare_losses(c);
  EXPECT_EQ(r.traces.size(), 8u);
  for (const ConvergenceTrace& t : r.traces) EXPECT_EQ(t.loss_mean.size(), c.steps);
}

TEST(CompareLosses, NeedsTwoLosses) {
  SimConfig c = small_config();
  c.losses = {spec_of(LossKind::CIoU)};
  EXPECT_THROW(compare_losses(c), ValidationError);
}

TEST(CompareLosses, BitIdenticalOnRerun) {
  SimConfig c = small_config();
  ComparisonReport a = compare_losses(c);
  ComparisonReport b = compare_losses(c);
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    EXPECT_EQ(a.traces[i].loss_mean, b.traces[i].loss_mean);
    EXPECT_EQ(a.traces[i].iou_mean, b.traces[i].iou_mean);
    EXPECT_EQ(a.traces[i].mean_pair_steps, b.traces[i].mean_pair_steps);
  }
}

TEST(CompareLosses, EveryLossSeesTheSamePairs) {
  SimConfig c = small_config();
  c.losses = {spec_of(LossKind::GIoU), spec_of(LossKind::SIoU)};
  ComparisonReport r = compare_losses(c);
  // Step 0 is measured before any update, so the initial mean IoU depends
  // only on the pairs.
  EXPECT_EQ(r.traces[0].iou_mean[0], r.traces[1].iou_mean[0]);
}

TEST(ConvergenceTrace, Summaries) {
  ConvergenceTrace t;
  t.loss_mean = {1.0, 0.5, 0.0};
  t.iou_mean = {0.0, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(t.area_under_loss(), 1.0);
  EXPECT_EQ(t.final_loss(), 0.0);
  EXPECT_EQ(t.final_iou(), 1.0);
}

TEST(LossLabels, DistinctAndFileSafe) {
  std::vector<LossSpec> l = {spec_of(LossKind::CIoU), spec_of(LossKind::SIB_IoU, 1.15), spec_of(LossKind::CIoU)};
  LossSpec printed = spec_of(LossKind::SIoU);
  printed.shape_sign = ShapeSign::AsPrinted;
  l.push_back(printed);
  std::vector<std::string> labels = loss_labels(l);
  EXPECT_EQ(labels[0], "ciou_0");
  EXPECT_EQ(labels[1], "sib_iou_r1.15");
  EXPECT_EQ(labels[2], "ciou_1");
  EXPECT_EQ(labels[3], "siou_asprinted");
}

TEST(Scenario, Names) {
  for (Scenario s : {Scenario::UniformRandom, Scenario::HighIouStart, Scenario::LowIouStart,
                     Scenario::AxisAlignedOffset}) {
    EXPECT_EQ(parse_scenario(to_string(s)), s);
  }
  EXPECT_THROW(parse_scenario("diagonal"), ValidationError);
  EXPECT_EQ(parse_optimizer("adam"), Optimizer::Adam);
}
