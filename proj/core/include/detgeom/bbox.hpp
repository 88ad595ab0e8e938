#pragma once

namespace detgeom {

struct Corners {
  double x1;
  double y1;
  double x2;
  double y2;
};

// Axis-aligned box in center form. Width and height are strictly positive
// and every field is finite; construction throws InvalidBoxError otherwise.
class BBox {
 public:
  BBox(double cx, double cy, double w, double h);

  static BBox from_corners(double x1, double y1, double x2, double y2);

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double w() const { return w_; }
  double h() const { return h_; }

  double x1() const { return cx_ - w_ / 2.0; }
  double y1() const { return cy_ - h_ / 2.0; }
  double x2() const { return cx_ + w_ / 2.0; }
  double y2() const { return cy_ + h_ / 2.0; }
  Corners corners() const { return {x1(), y1(), x2(), y2()}; }

  BBox translated(double dx, double dy) const { return {cx_ + dx, cy_ + dy, w_, h_}; }
  BBox scaled(double s) const { return {cx_ * s, cy_ * s, w_ * s, h_ * s}; }

  friend bool operator==(const BBox&, const BBox&) = default;

 private:
  double cx_;
  double cy_;
  double w_;
  double h_;
};

// Minimum axis-aligned box covering two boxes.
struct EncloseBox {
  double x1;
  double y1;
  double x2;
  double y2;
  double wc;
  double hc;
};

double area(const BBox& b);
double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);
EncloseBox enclose(const BBox& a, const BBox& b);

}  // namespace detgeom
