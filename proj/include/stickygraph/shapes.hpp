#pragma once

#include <string>
#include <vector>

#include "stickygraph/grid.hpp"

namespace stickygraph {

/// Exterior data catalog: sums of zero / linear / compact-bump / spline-bump terms.
struct ShapeTerm {
  enum class Kind { zero, linear, compact_bump, spline_bump };
  Kind kind = Kind::zero;
  // linear: a*x + b. compact_bump: height, center a, radius b.
  // spline_bump: height, support [a, b].
  double a = 0, b = 0, height = 0;
};

class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<ShapeTerm> terms) : terms_(std::move(terms)) {}

  static Shape zero() { return {}; }
  static Shape linear(double slope, double offset);
  /// height * exp(1 - 1/(1-r^2)), r = (x-center)/radius; C-infinity, peak = height.
  static Shape compact_bump(double center, double radius, double height);
  /// Cubic B-spline on four equal knot spans of [lo,hi]; C^2, peak = height.
  static Shape spline_bump(double lo, double hi, double height);

  Shape operator+(const Shape& o) const;
  Shape scaled(double k) const;
  /// x -> shape(c - x): mirror about c/2.
  Shape mirrored(double c) const;

  double value(double x) const;
  double derivative(double x) const;

  const std::vector<ShapeTerm>& terms() const { return terms_; }
  bool is_linear() const;
  /// Hull of the non-linear terms' supports; empty interval (lo > hi) if none.
  Interval support() const;
  /// Points where some term is less smooth (support ends, spline knots).
  std::vector<double> knots() const;
  /// Minimum over a dense sample of the support (used to check phi >= 0).
  double sampled_min() const;

 private:
  std::vector<ShapeTerm> terms_;
};

std::string to_string(ShapeTerm::Kind k);
ShapeTerm::Kind shape_kind_from_string(const std::string& name);

}  // namespace stickygraph
