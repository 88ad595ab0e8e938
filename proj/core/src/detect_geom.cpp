#include "detgeom/detect_geom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "detgeom/error.hpp"

namespace detgeom {

std::vector<HeadSpec> HeadLayout::default_heads() {
  return {{"P1", 320, 320, 2}, {"P2", 160, 160, 4}, {"P3", 80, 80, 8}, {"P4", 40, 40, 16}, {"P5", 20, 20, 32}};
}

void HeadLayout::validate() const {
  if (input_size == 0) throw ValidationError("layout.input_size must be > 0");
  if (heads.empty()) throw ValidationError("layout needs at least one head");
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const HeadSpec& h = heads[i];
    if (h.stride == 0 || h.grid_h == 0 || h.grid_w == 0) {
      throw ValidationError("head " + h.name + ": grid and stride must be > 0");
    }
    if (h.grid_h * h.stride != input_size || h.grid_w * h.stride != input_size) {
      std::ostringstream os;
      os << "head " << h.name << ": grid " << h.grid_h << "x" << h.grid_w << " * stride " << h.stride
         << " does not cover input_size " << input_size;
      throw ValidationError(os.str());
    }
    if (i > 0 && heads[i - 1].stride >= h.stride) {
      throw ValidationError("head strides must be strictly increasing (" + heads[i - 1].name + " then " + h.name + ")");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (heads[j].name == h.name) throw ValidationError("duplicate head name " + h.name);
    }
  }
}

const HeadSpec& HeadLayout::head(const std::string& name) const {
  for (const HeadSpec& h : heads) {
    if (h.name == name) return h;
  }
  throw UnknownHeadError("unknown head '" + name + "'");
}

std::vector<Point2> grid_centers(const HeadLayout& layout, const std::string& head_name) {
  const HeadSpec& h = layout.head(head_name);
  std::vector<Point2> out;
  out.reserve(h.grid_h * h.grid_w);
  const auto s = static_cast<double>(h.stride);
  for (std::size_t r = 0; r < h.grid_h; ++r) {
    for (std::size_t c = 0; c < h.grid_w; ++c) {
      out.push_back({(static_cast<double>(c) + 0.5) * s, (static_cast<double>(r) + 0.5) * s});
    }
  }
  return out;
}

namespace {

// Clip [lo, hi] to [0, limit] keeping a length of at least 1.
std::pair<double, double> clip_span(double lo, double hi, double limit) {
  lo = std::clamp(lo, 0.0, limit);
  hi = std::clamp(hi, 0.0, limit);
  if (hi - lo < 1.0) {
    if (lo + 1.0 <= limit) {
      hi = lo + 1.0;
    } else {
      hi = limit;
      lo = limit - 1.0;
    }
  }
  return {lo, hi};
}

}  // namespace

ScoredBox decode(const RawPrediction& pred, const HeadLayout& layout) {
  const HeadSpec& h = layout.head(pred.head_name);
  if (pred.row >= h.grid_h || pred.col >= h.grid_w) throw ValidationError("prediction cell outside head grid");
  if (!(pred.dw > 0.0) || !(pred.dh > 0.0)) throw ValidationError("size factors must be > 0");
  if (pred.class_scores.empty()) throw ValidationError("prediction has no class scores");
  for (double s : pred.class_scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("class scores must be in [0, 1]");
  }
  const auto stride = static_cast<double>(h.stride);
  const double cx = (static_cast<double>(pred.col) + 0.5 + pred.dx) * stride;
  const double cy = (static_cast<double>(pred.row) + 0.5 + pred.dy) * stride;
  const double w = pred.dw * stride;
  const double hh = pred.dh * stride;
  const auto limit = static_cast<double>(layout.input_size);
  const auto [x1, x2] = clip_span(cx - w / 2.0, cx + w / 2.0, limit);
  const auto [y1, y2] = clip_span(cy - hh / 2.0, cy + hh / 2.0, limit);

  const auto best = std::max_element(pred.class_scores.begin(), pred.class_scores.end());
  return {BBox::from_corners(x1, y1, x2, y2), static_cast<int>(best - pred.class_scores.begin()), *best};
}

std::vector<ScoredBox> nms(const std::vector<ScoredBox>& dets, double iou_threshold, bool class_agnostic) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) throw ValidationError("nms iou_threshold must be in (0, 1)");
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  std::vector<ScoredBox> kept;
  for (std::size_t i : order) {
    const ScoredBox& cand = dets[i];
    bool keep = true;
    for (const ScoredBox& k : kept) {
      if (!class_agnostic && k.class_id != cand.class_id) continue;
      if (iou(cand.box, k.box) >= iou_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(cand);
  }
  return kept;
}

}  // namespace detgeom
