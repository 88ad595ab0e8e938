#include "detgeom/bbox.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "detgeom/error.hpp"

namespace detgeom {

BBox::BBox(double cx, double cy, double w, double h) : cx_(cx), cy_(cy), w_(w), h_(h) {
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(w) || !std::isfinite(h)) {
    throw InvalidBoxError("box fields must be finite");
  }
  if (!(w > 0.0) || !(h > 0.0)) {
    std::ostringstream os;
    os << "box width and height must be > 0 (got w=" << w << ", h=" << h << ")";
    throw InvalidBoxError(os.str());
  }
}

BBox BBox::from_corners(double x1, double y1, double x2, double y2) {
  return {(x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1};
}

double area(const BBox& b) { return b.w() * b.h(); }

double intersection_area(const BBox& a, const BBox& b) {
  if (a == b) return area(a);
  const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  return std::max(iw, 0.0) * std::max(ih, 0.0);
}

double iou(const BBox& a, const BBox& b) {
  if (a == b) return 1.0;
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  return inter / (area(a) + area(b) - inter);
}

EncloseBox enclose(const BBox& a, const BBox& b) {
  EncloseBox e{};
  e.x1 = std::min(a.x1(), b.x1());
  e.y1 = std::min(a.y1(), b.y1());
  e.x2 = std::max(a.x2(), b.x2());
  e.y2 = std::max(a.y2(), b.y2());
  e.wc = e.x2 - e.x1;
  e.hc = e.y2 - e.y1;
  return e;
}

}  // namespace detgeom
