#include "detgeom/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "detgeom/detail/dual.hpp"
#include "detgeom/error.hpp"

namespace detgeom {

namespace {

using detail::Dual4;
using detail::value;
using detail::vmax;
using detail::vmin;
using std::abs;
using std::asin;
using std::atan;
using std::exp;
using std::pow;
using std::sin;
using std::sqrt;

template <class T>
struct Box {
  T cx;
  T cy;
  T w;
  T h;
};

Box<double> plain(const BBox& b) { return {b.cx(), b.cy(), b.w(), b.h()}; }

Box<Dual4> seeded(const BBox& b) {
  return {Dual4(b.cx(), 0), Dual4(b.cy(), 1), Dual4(b.w(), 2), Dual4(b.h(), 3)};
}

template <class T>
Box<T> promote(const BBox& b) {
  return {T(b.cx()), T(b.cy()), T(b.w()), T(b.h())};
}

// Length of the overlap of [lo_a, hi_a] and [lo_b, hi_b], clamped at zero.
template <class T>
T overlap_1d(const T& lo_a, const T& hi_a, const T& lo_b, const T& hi_b) {
  T len = vmin(hi_a, hi_b) - vmax(lo_a, lo_b);
  return value(len) > 0.0 ? len : T(0.0);
}

// Intersection of the two boxes after scaling each about its own center.
template <class T>
T scaled_intersection(const Box<T>& g, const Box<T>& p, double scale) {
  const T gw = g.w * scale / 2.0;
  const T gh = g.h * scale / 2.0;
  const T pw = p.w * scale / 2.0;
  const T ph = p.h * scale / 2.0;
  const T iw = overlap_1d(g.cx - gw, g.cx + gw, p.cx - pw, p.cx + pw);
  const T ih = overlap_1d(g.cy - gh, g.cy + gh, p.cy - ph, p.cy + ph);
  return iw * ih;
}

template <class T>
T iou_t(const Box<T>& g, const Box<T>& p) {
  const T inter = scaled_intersection(g, p, 1.0);
  return inter / (g.w * g.h + p.w * p.h - inter);
}

template <class T>
T inner_iou_t(const Box<T>& g, const Box<T>& p, double ratio) {
  const T inter = scaled_intersection(g, p, ratio);
  const double r2 = ratio * ratio;
  const T uni = g.w * g.h * r2 + p.w * p.h * r2 - inter;
  return inter / uni;
}

template <class T>
struct Enclosure {
  T wc;
  T hc;
};

template <class T>
Enclosure<T> enclose_t(const Box<T>& g, const Box<T>& p) {
  const T x1 = vmin(g.cx - g.w / 2.0, p.cx - p.w / 2.0);
  const T x2 = vmax(g.cx + g.w / 2.0, p.cx + p.w / 2.0);
  const T y1 = vmin(g.cy - g.h / 2.0, p.cy - p.h / 2.0);
  const T y2 = vmax(g.cy + g.h / 2.0, p.cy + p.h / 2.0);
  return {x2 - x1, y2 - y1};
}

template <class T>
T angle_cost_t(const Box<T>& g, const Box<T>& p, double epsilon) {
  const T dx = p.cx - g.cx;
  const T dy = p.cy - g.cy;
  const T ax = abs(dx);
  const T ay = abs(dy);
  // Ties take the |dx| branch.
  const T nearest = value(ax) <= value(ay) ? ax : ay;
  const T sigma = sqrt(dx * dx + dy * dy + T(epsilon));
  return sin(2.0 * asin(nearest / sigma));
}

template <class T>
T distance_cost_t(const Box<T>& g, const Box<T>& p, const T& lambda) {
  const Enclosure<T> c = enclose_t(g, p);
  const T rx = (p.cx - g.cx) / c.wc;
  const T ry = (p.cy - g.cy) / c.hc;
  const T gamma = 2.0 - lambda;
  return 0.5 * ((1.0 - exp(-gamma * (rx * rx))) + (1.0 - exp(-gamma * (ry * ry))));
}

template <class T>
T shape_cost_t(const Box<T>& g, const Box<T>& p, double theta, ShapeSign sign) {
  const double s = sign == ShapeSign::Corrected ? -1.0 : 1.0;
  const T ww = abs(p.w - g.w) / vmax(p.w, g.w);
  const T wh = abs(p.h - g.h) / vmax(p.h, g.h);
  // |.| keeps non-integer theta defined under the as-printed sign; for the
  // corrected sign the base is already non-negative.
  const T tw = pow(abs(1.0 - exp(s * ww)), theta);
  const T th = pow(abs(1.0 - exp(s * wh)), theta);
  return 0.5 * (tw + th);
}

template <class T>
T siou_t(const Box<T>& g, const Box<T>& p, const LossSpec& spec) {
  const T lambda = angle_cost_t(g, p, spec.epsilon);
  const T delta = distance_cost_t(g, p, lambda);
  const T omega = shape_cost_t(g, p, spec.theta, spec.shape_sign);
  return 1.0 - iou_t(g, p) + (delta + omega) / 2.0;
}

template <class T>
T loss_t(const Box<T>& g, const Box<T>& p, const LossSpec& spec) {
  switch (spec.kind) {
    case LossKind::IoU:
      return 1.0 - iou_t(g, p);
    case LossKind::GIoU: {
      const T inter = scaled_intersection(g, p, 1.0);
      const T uni = g.w * g.h + p.w * p.h - inter;
      const Enclosure<T> c = enclose_t(g, p);
      const T hull = c.wc * c.hc;
      return 1.0 - inter / uni + (hull - uni) / hull;
    }
    case LossKind::DIoU: {
      const Enclosure<T> c = enclose_t(g, p);
      const T dx = p.cx - g.cx;
      const T dy = p.cy - g.cy;
      return 1.0 - iou_t(g, p) + (dx * dx + dy * dy) / (c.wc * c.wc + c.hc * c.hc);
    }
    case LossKind::CIoU: {
      const Enclosure<T> c = enclose_t(g, p);
      const T dx = p.cx - g.cx;
      const T dy = p.cy - g.cy;
      const T iou = iou_t(g, p);
      const T da = atan(g.w / g.h) - atan(p.w / p.h);
      const T v = (4.0 / (std::numbers::pi * std::numbers::pi)) * da * da;
      const T alpha = v / ((1.0 - iou) + v + T(spec.epsilon));
      return 1.0 - iou + (dx * dx + dy * dy) / (c.wc * c.wc + c.hc * c.hc) + alpha * v;
    }
    case LossKind::EIoU: {
      const Enclosure<T> c = enclose_t(g, p);
      const T dx = p.cx - g.cx;
      const T dy = p.cy - g.cy;
      const T dw = p.w - g.w;
      const T dh = p.h - g.h;
      return 1.0 - iou_t(g, p) + (dx * dx + dy * dy) / (c.wc * c.wc + c.hc * c.hc) +
             (dw * dw) / (c.wc * c.wc) + (dh * dh) / (c.hc * c.hc);
    }
    case LossKind::SIoU:
      return siou_t(g, p, spec);
    case LossKind::InnerIoU:
      return 1.0 - inner_iou_t(g, p, spec.ratio);
    case LossKind::SIB_IoU:
      return siou_t(g, p, spec) + (iou_t(g, p) - inner_iou_t(g, p, spec.ratio));
  }
  throw UnknownLossKindError("unknown loss kind");
}

std::string normalize_name(std::string_view name) {
  std::string out;
  for (char ch : name) {
    if (ch == '-' || ch == '_' || ch == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

void edge_margins(const BBox& g, const BBox& p, double scale, double& m) {
  const double gl = g.cx() - g.w() * scale / 2.0, gr = g.cx() + g.w() * scale / 2.0;
  const double gt = g.cy() - g.h() * scale / 2.0, gb = g.cy() + g.h() * scale / 2.0;
  const double pl = p.cx() - p.w() * scale / 2.0, pr = p.cx() + p.w() * scale / 2.0;
  const double pt = p.cy() - p.h() * scale / 2.0, pb = p.cy() + p.h() * scale / 2.0;
  m = std::min({m, std::abs(gl - pl), std::abs(gr - pr), std::abs(gt - pt), std::abs(gb - pb),
                std::abs(std::min(gr, pr) - std::max(gl, pl)),
                std::abs(std::min(gb, pb) - std::max(gt, pt))});
}

void angle_margins(const BBox& g, const BBox& p, const LossSpec& spec, double& m) {
  const double ax = std::abs(p.cx() - g.cx());
  const double ay = std::abs(p.cy() - g.cy());
  m = std::min({m, ax, ay, std::abs(ax - ay)});
  if (spec.theta < 2.0) {
    m = std::min({m, std::abs(p.w() - g.w()), std::abs(p.h() - g.h())});
  }
}

}  // namespace

void LossSpec::validate() const {
  if (!(ratio >= kMinRatio && ratio <= kMaxRatio)) {
    std::ostringstream os;
    os << "ratio out of [0.5, 1.5] (got " << ratio << ")";
    throw RatioOutOfRangeError(os.str());
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ValidationError("theta must be > 0");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be > 0");
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::IoU: return "iou";
    case LossKind::GIoU: return "giou";
    case LossKind::DIoU: return "diou";
    case LossKind::CIoU: return "ciou";
    case LossKind::EIoU: return "eiou";
    case LossKind::SIoU: return "siou";
    case LossKind::InnerIoU: return "inner_iou";
    case LossKind::SIB_IoU: return "sib_iou";
  }
  return "unknown";
}

std::string_view to_string(ShapeSign sign) {
  return sign == ShapeSign::Corrected ? "corrected" : "as_printed";
}

LossKind parse_loss_kind(std::string_view name) {
  const std::string key = normalize_name(name);
  for (LossKind k : kAllLossKinds) {
    if (normalize_name(to_string(k)) == key) return k;
  }
  throw UnknownLossKindError("unknown loss kind '" + std::string(name) + "'");
}

ShapeSign parse_shape_sign(std::string_view name) {
  const std::string key = normalize_name(name);
  if (key == "corrected") return ShapeSign::Corrected;
  if (key == "asprinted") return ShapeSign::AsPrinted;
  throw ValidationError("unknown shape_sign '" + std::string(name) + "' (expected corrected|as_printed)");
}

double angle_cost(const BBox& gt, const BBox& pred, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  return angle_cost_t(plain(gt), plain(pred), epsilon);
}

double distance_cost(const BBox& gt, const BBox& pred, double lambda) {
  return distance_cost_t(plain(gt), plain(pred), lambda);
}

double shape_cost(const BBox& gt, const BBox& pred, double theta, ShapeSign sign) {
  if (!(theta > 0.0)) throw ValidationError("theta must be > 0");
  return shape_cost_t(plain(gt), plain(pred), theta, sign);
}

SIoUComponents siou_components(const BBox& gt, const BBox& pred, const LossSpec& spec) {
  spec.validate();
  SIoUComponents c;
  c.lambda = angle_cost(gt, pred, spec.epsilon);
  c.gamma = 2.0 - c.lambda;
  c.delta = distance_cost(gt, pred, c.lambda);
  c.omega = shape_cost(gt, pred, spec.theta, spec.shape_sign);
  return c;
}

std::pair<Corners, Corners> inner_boxes(const BBox& gt, const BBox& pred, double ratio) {
  LossSpec probe;
  probe.ratio = ratio;
  probe.validate();
  auto scaled = [ratio](const BBox& b) {
    return Corners{b.cx() - b.w() * ratio / 2.0, b.cy() - b.h() * ratio / 2.0,
                   b.cx() + b.w() * ratio / 2.0, b.cy() + b.h() * ratio / 2.0};
  };
  return {scaled(gt), scaled(pred)};
}

double inner_iou(const BBox& gt, const BBox& pred, double ratio) {
  LossSpec probe;
  probe.ratio = ratio;
  probe.validate();
  if (gt == pred) return 1.0;
  if (ratio == 1.0) return iou(gt, pred);
  return inner_iou_t(plain(gt), plain(pred), ratio);
}

double smooth_margin(const BBox& gt, const BBox& pred, const LossSpec& spec) {
  double m = std::numeric_limits<double>::infinity();
  if (gt == pred) return 0.0;
  switch (spec.kind) {
    case LossKind::IoU:
    case LossKind::GIoU:
    case LossKind::DIoU:
    case LossKind::CIoU:
    case LossKind::EIoU:
      edge_margins(gt, pred, 1.0, m);
      break;
    case LossKind::SIoU:
      edge_margins(gt, pred, 1.0, m);
      angle_margins(gt, pred, spec, m);
      break;
    case LossKind::InnerIoU:
      edge_margins(gt, pred, spec.ratio, m);
      break;
    case LossKind::SIB_IoU:
      edge_margins(gt, pred, 1.0, m);
      edge_margins(gt, pred, spec.ratio, m);
      angle_margins(gt, pred, spec, m);
      break;
  }
  return m;
}

LossResult evaluate_loss(const BBox& gt, const BBox& pred, const LossSpec& spec, bool with_grad) {
  spec.validate();
  LossResult r;
  if (gt == pred) {
    // Global minimum of every kind; the zero vector is a valid subgradient.
    r.value = 0.0;
    if (with_grad) r.grad = Gradient{0.0, 0.0, 0.0, 0.0};
    r.non_smooth = true;
    r.smooth_margin = 0.0;
    return r;
  }
  r.value = loss_t(plain(gt), plain(pred), spec);
  if (with_grad) {
    const Dual4 d = loss_t(promote<Dual4>(gt), seeded(pred), spec);
    r.grad = d.d;
  }
  r.smooth_margin = smooth_margin(gt, pred, spec);
  r.non_smooth = r.smooth_margin == 0.0;
  return r;
}

LossResult siou_loss(const BBox& gt, const BBox& pred, const LossSpec& spec) {
  LossSpec s = spec;
  s.kind = LossKind::SIoU;
  return evaluate_loss(gt, pred, s);
}

LossResult sib_iou_loss(const BBox& gt, const BBox& pred, const LossSpec& spec) {
  LossSpec s = spec;
  s.kind = LossKind::SIB_IoU;
  return evaluate_loss(gt, pred, s);
}

LossResult baseline_loss(const BBox& gt, const BBox& pred, const LossSpec& spec) {
  switch (spec.kind) {
    case LossKind::IoU:
    case LossKind::GIoU:
    case LossKind::DIoU:
    case LossKind::CIoU:
    case LossKind::EIoU:
      return evaluate_loss(gt, pred, spec);
    default:
      throw UnknownLossKindError("baseline_loss does not handle kind '" + std::string(to_string(spec.kind)) + "'");
  }
}

double loss_value(const BBox& gt, const BBox& pred, const LossSpec& spec) {
  return evaluate_loss(gt, pred, spec, false).value;
}

Gradient loss_gradient(const BBox& gt, const BBox& pred, const LossSpec& spec) {
  return *evaluate_loss(gt, pred, spec, true).grad;
}

}  // namespace detgeom
