#include <gtest/gtest.h>

#include <cmath>

#include "detgeom/bbox.hpp"
#include "detgeom/error.hpp"
#include "detgeom/random.hpp"
#include "oracles.hpp"

using namespace detgeom;

namespace {

oracle::Box ob(const BBox& b) { return {b.cx(), b.cy(), b.w(), b.h()}; }

BBox random_box(Rng& rng) {
  return BBox(rng.uniform(-1.0, 2.0), rng.uniform(-1.0, 2.0), rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0));
}

}  // namespace

TEST(BBox, RejectsDegenerateAndNonFinite) {
  EXPECT_THROW(BBox(0.5, 0.5, 0.0, 0.1), InvalidBoxError);
  EXPECT_THROW(BBox(0.5, 0.5, 0.1, -0.1), InvalidBoxError);
  EXPECT_THROW(BBox(NAN, 0.5, 0.1, 0.1), InvalidBoxError);
  EXPECT_THROW(BBox(0.5, 0.5, INFINITY, 0.1), InvalidBoxError);
}

TEST(BBox, CornerViewRoundTrips) {
  BBox b(0.3, 0.7, 0.2, 0.5);
  EXPECT_LT(b.x1(), b.x2());
  EXPECT_LT(b.y1(), b.y2());
  BBox r = BBox::from_corners(b.x1(), b.y1(), b.x2(), b.y2());
  EXPECT_NEAR(r.cx(), b.cx(), 1e-15);
  EXPECT_NEAR(r.cy(), b.cy(), 1e-15);
  EXPECT_NEAR(r.w(), b.w(), 1e-15);
  EXPECT_NEAR(r.h(), b.h(), 1e-15);
}

TEST(Area, Examples) {
  EXPECT_DOUBLE_EQ(area(BBox(0.5, 0.5, 0.4, 0.4)), 0.16);
  EXPECT_DOUBLE_EQ(area(BBox(0, 0, 1, 1)), 1.0);
  EXPECT_DOUBLE_EQ(area(BBox(0.3, 0.7, 0.2, 0.5)), 0.10);
}

TEST(IntersectionArea, Examples) {
  BBox a(0.5, 0.5, 0.4, 0.4);
  BBox b(0.6, 0.6, 0.4, 0.4);
  EXPECT_DOUBLE_EQ(intersection_area(a, b), oracle::overlap_area(oracle::rect_of(ob(a)), oracle::rect_of(ob(b))));
  EXPECT_NEAR(intersection_area(a, b), 0.09, 1e-15);
  EXPECT_DOUBLE_EQ(intersection_area(a, a), 0.16);
  EXPECT_EQ(intersection_area(BBox(0, 0, 0.2, 0.2), BBox(1, 1, 0.2, 0.2)), 0.0);
}

TEST(IntersectionArea, TouchingEdgesIsZero) {
  EXPECT_EQ(intersection_area(BBox(0.25, 0.5, 0.5, 0.5), BBox(0.75, 0.5, 0.5, 0.5)), 0.0);
}

TEST(Iou, Examples) {
  BBox a(0.5, 0.5, 0.4, 0.4);
  BBox b(0.6, 0.6, 0.4, 0.4);
  EXPECT_NEAR(iou(a, b), 9.0 / 23.0, 1e-15);
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(BBox(0, 0, 0.2, 0.2), BBox(1, 1, 0.2, 0.2)), 0.0);
}

TEST(Enclose, Examples) {
  EncloseBox e = enclose(BBox(0.5, 0.5, 0.4, 0.4), BBox(0.6, 0.6, 0.4, 0.4));
  EXPECT_NEAR(e.x1, 0.3, 1e-15);
  EXPECT_NEAR(e.y1, 0.3, 1e-15);
  EXPECT_NEAR(e.x2, 0.8, 1e-15);
  EXPECT_NEAR(e.y2, 0.8, 1e-15);
  EXPECT_NEAR(e.wc, 0.5, 1e-15);
  EXPECT_NEAR(e.hc, 0.5, 1e-15);

  BBox a(0.4, 0.6, 0.2, 0.3);
  EncloseBox self = enclose(a, a);
  EXPECT_EQ(self.x1, a.x1());
  EXPECT_EQ(self.y2, a.y2());

  BBox outer(0.5, 0.5, 0.8, 0.8);
  BBox inner(0.45, 0.55, 0.1, 0.2);
  EncloseBox n = enclose(outer, inner);
  EXPECT_EQ(n.x1, outer.x1());
  EXPECT_EQ(n.y1, outer.y1());
  EXPECT_EQ(n.x2, outer.x2());
  EXPECT_EQ(n.y2, outer.y2());
}

TEST(GeomProperties, RandomPairs) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    BBox a = random_box(rng);
    BBox b = random_box(rng);
    SCOPED_TRACE(i);

    EXPECT_EQ(iou(a, b), iou(b, a));

    const double inter = intersection_area(a, b);
    EXPECT_GE(inter, 0.0);
    // Corner arithmetic can round one ulp past the exact value.
    EXPECT_LE(inter, std::min(area(a), area(b)) * (1 + 1e-12));
    EXPECT_NEAR(inter, oracle::overlap_area(oracle::rect_of(ob(a)), oracle::rect_of(ob(b))), 1e-15);

    EncloseBox e = enclose(a, b);
    for (const BBox& x : {a, b}) {
      EXPECT_LE(e.x1, x.x1());
      EXPECT_LE(e.y1, x.y1());
      EXPECT_GE(e.x2, x.x2());
      EXPECT_GE(e.y2, x.y2());
    }
    EXPECT_GE(e.wc, std::max(a.w(), b.w()) * (1 - 1e-12));
    EXPECT_GE(e.hc, std::max(a.h(), b.h()) * (1 - 1e-12));

    const double dx = rng.uniform(-5.0, 5.0);
    const double dy = rng.uniform(-5.0, 5.0);
    EXPECT_NEAR(iou(a.translated(dx, dy), b.translated(dx, dy)), iou(a, b), 1e-12);

    const double s = std::exp(rng.uniform(-3.0, 3.0));
    const double base = iou(a, b);
    const double scaled = iou(a.scaled(s), b.scaled(s));
    if (base == 0.0) {
      EXPECT_EQ(scaled, 0.0);
    } else {
      EXPECT_LE(std::fabs(scaled - base), 1e-12 * base) << "s=" << s;
    }
  }
}
