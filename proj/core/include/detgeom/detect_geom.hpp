#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "detgeom/bbox.hpp"

namespace detgeom {

struct HeadSpec {
  std::string name;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::size_t stride = 0;
};

// Detection-head grids over a square input. The default is the five-scale
// layout P1 (320x320, stride 2) through P5 (20x20, stride 32).
struct HeadLayout {
  std::size_t input_size = 640;
  std::vector<HeadSpec> heads = default_heads();

  // grid * stride == input_size on both axes, strides strictly increasing.
  void validate() const;
  const HeadSpec& head(const std::string& name) const;  // throws UnknownHeadError

  static std::vector<HeadSpec> default_heads();
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Cell centers ((col + 0.5) * stride, (row + 0.5) * stride), row-major.
std::vector<Point2> grid_centers(const HeadLayout& layout, const std::string& head_name);

struct RawPrediction {
  std::string head_name;
  std::size_t row = 0;
  std::size_t col = 0;
  double dx = 0.0;  // center offset, in cells
  double dy = 0.0;
  double dw = 1.0;  // size, in strides
  double dh = 1.0;
  std::vector<double> class_scores;
};

struct ScoredBox {
  BBox box;
  int class_id = 0;
  double confidence = 0.0;
};

// Anchor-free decode: center = cell center + offset * stride, size =
// factor * stride, then clipped to [0, input_size] with sides floored at 1.
// class_id is the argmax score (first on ties).
ScoredBox decode(const RawPrediction& pred, const HeadLayout& layout);

// Greedy NMS: confidence descending (stable), keep a box iff its IoU with
// every kept box of the same class (any kept box when class_agnostic) is
// below iou_threshold.
std::vector<ScoredBox> nms(const std::vector<ScoredBox>& dets, double iou_threshold = 0.45,
                           bool class_agnostic = false);

}  // namespace detgeom
