#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detgeom/bbox.hpp"

namespace detgeom {

enum class LossKind { IoU, GIoU, DIoU, CIoU, EIoU, SIoU, InnerIoU, SIB_IoU };

// Sign of the exponent inside the shape cost (1 - e^{±ω})^θ.
enum class ShapeSign { AsPrinted, Corrected };

inline constexpr std::array<LossKind, 8> kAllLossKinds = {
    LossKind::IoU,  LossKind::GIoU, LossKind::DIoU,     LossKind::CIoU,
    LossKind::EIoU, LossKind::SIoU, LossKind::InnerIoU, LossKind::SIB_IoU};

inline constexpr double kMinRatio = 0.5;
inline constexpr double kMaxRatio = 1.5;

struct LossSpec {
  LossKind kind = LossKind::SIB_IoU;
  double ratio = 1.15;
  double theta = 4.0;
  double epsilon = 1e-7;
  ShapeSign shape_sign = ShapeSign::Corrected;

  // Throws RatioOutOfRangeError / ValidationError.
  void validate() const;
};

std::string_view to_string(LossKind kind);
std::string_view to_string(ShapeSign sign);
// Accepts "sib_iou", "SIB-IoU", "sibiou", ... (case and separator insensitive).
LossKind parse_loss_kind(std::string_view name);
ShapeSign parse_shape_sign(std::string_view name);

using Gradient = std::array<double, 4>;  // d/d(cx, cy, w, h) of the predicted box

struct LossResult {
  double value = 0.0;
  std::optional<Gradient> grad;
  // True when the gradient is a subgradient taken at a branch switch
  // (angle-cost tie, touching edges, coincident edges, identical boxes).
  bool non_smooth = false;
  // Distance (in coordinate units) from pred to the nearest branch switch of
  // this loss. Finite differences with step < smooth_margin / 2 stay on one
  // smooth piece.
  double smooth_margin = 0.0;
};

struct SIoUComponents {
  double lambda = 0.0;  // angle cost
  double gamma = 2.0;   // 2 - lambda
  double delta = 0.0;   // distance cost
  double omega = 0.0;   // shape cost
};

double angle_cost(const BBox& gt, const BBox& pred, double epsilon);
double distance_cost(const BBox& gt, const BBox& pred, double lambda);
double shape_cost(const BBox& gt, const BBox& pred, double theta, ShapeSign sign);
SIoUComponents siou_components(const BBox& gt, const BBox& pred, const LossSpec& spec);

// Both boxes grown or shrunk about their own centers by ratio.
std::pair<Corners, Corners> inner_boxes(const BBox& gt, const BBox& pred, double ratio);
double inner_iou(const BBox& gt, const BBox& pred, double ratio);

LossResult siou_loss(const BBox& gt, const BBox& pred, const LossSpec& spec);
LossResult sib_iou_loss(const BBox& gt, const BBox& pred, const LossSpec& spec);
// IoU, GIoU, DIoU, CIoU and EIoU; other kinds throw UnknownLossKindError.
LossResult baseline_loss(const BBox& gt, const BBox& pred, const LossSpec& spec);

// Dispatches on spec.kind.
LossResult evaluate_loss(const BBox& gt, const BBox& pred, const LossSpec& spec, bool with_grad = true);
double loss_value(const BBox& gt, const BBox& pred, const LossSpec& spec);
Gradient loss_gradient(const BBox& gt, const BBox& pred, const LossSpec& spec);

double smooth_margin(const BBox& gt, const BBox& pred, const LossSpec& spec);

}  // namespace detgeom
