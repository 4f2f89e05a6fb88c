#include "stickygraph/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stickygraph/errors.hpp"

namespace stickygraph {

namespace {

// Uniform cubic B-spline on knots 0..4, value and derivative.
double bspline(double z) {
  if (z <= 0 || z >= 4) return 0;
  if (z < 1) return z * z * z / 6;
  if (z < 2) return (-3 * z * z * z + 12 * z * z - 12 * z + 4) / 6;
  if (z < 3) return (3 * z * z * z - 24 * z * z + 60 * z - 44) / 6;
  const double w = 4 - z;
  return w * w * w / 6;
}

double bspline_prime(double z) {
  if (z <= 0 || z >= 4) return 0;
  if (z < 1) return z * z / 2;
  if (z < 2) return (-9 * z * z + 24 * z - 12) / 6;
  if (z < 3) return (9 * z * z - 48 * z + 60) / 6;
  const double w = 4 - z;
  return -w * w / 2;
}

double term_value(const ShapeTerm& t, double x) {
  switch (t.kind) {
    case ShapeTerm::Kind::zero:
      return 0;
    case ShapeTerm::Kind::linear:
      return t.a * x + t.b;
    case ShapeTerm::Kind::compact_bump: {
      const double r = (x - t.a) / t.b;
      if (std::abs(r) >= 1) return 0;
      return t.height * std::exp(1 - 1 / (1 - r * r));
    }
    case ShapeTerm::Kind::spline_bump:
      return t.height * 1.5 * bspline(4 * (x - t.a) / (t.b - t.a));
  }
  return 0;
}

double term_derivative(const ShapeTerm& t, double x) {
  switch (t.kind) {
    case ShapeTerm::Kind::zero:
      return 0;
    case ShapeTerm::Kind::linear:
      return t.a;
    case ShapeTerm::Kind::compact_bump: {
      const double r = (x - t.a) / t.b;
      if (std::abs(r) >= 1) return 0;
      const double om = 1 - r * r;
      return t.height * std::exp(1 - 1 / om) * (-2 * r / (om * om)) / t.b;
    }
    case ShapeTerm::Kind::spline_bump: {
      const double k = 4 / (t.b - t.a);
      return t.height * 1.5 * k * bspline_prime(k * (x - t.a));
    }
  }
  return 0;
}

}  // namespace

Shape Shape::linear(double slope, double offset) { return Shape({{ShapeTerm::Kind::linear, slope, offset, 0}}); }

Shape Shape::compact_bump(double center, double radius, double height) {
  if (!(radius > 0)) throw ParameterError("compact_bump: radius must be positive");
  return Shape({{ShapeTerm::Kind::compact_bump, center, radius, height}});
}

Shape Shape::spline_bump(double lo, double hi, double height) {
  if (!(hi > lo)) throw ParameterError("spline_bump: need lo < hi");
  return Shape({{ShapeTerm::Kind::spline_bump, lo, hi, height}});
}

Shape Shape::operator+(const Shape& o) const {
  auto t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return Shape(std::move(t));
}

Shape Shape::scaled(double k) const {
  auto t = terms_;
  for (auto& x : t) {
    if (x.kind == ShapeTerm::Kind::linear) {
      x.a *= k;
      x.b *= k;
    } else {
      x.height *= k;
    }
  }
  return Shape(std::move(t));
}

Shape Shape::mirrored(double c) const {
  auto t = terms_;
  for (auto& x : t) {
    switch (x.kind) {
      case ShapeTerm::Kind::zero:
        break;
      case ShapeTerm::Kind::linear:
        x.b += x.a * c;
        x.a = -x.a;
        break;
      case ShapeTerm::Kind::compact_bump:
        x.a = c - x.a;
        break;
      case ShapeTerm::Kind::spline_bump: {
        const double lo = c - x.b, hi = c - x.a;
        x.a = lo;
        x.b = hi;
        break;
      }
    }
  }
  return Shape(std::move(t));
}

double Shape::value(double x) const {
  double v = 0;
  for (const auto& t : terms_) v += term_value(t, x);
  return v;
}

double Shape::derivative(double x) const {
  double v = 0;
  for (const auto& t : terms_) v += term_derivative(t, x);
  return v;
}

bool Shape::is_linear() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const ShapeTerm& t) {
    return t.kind == ShapeTerm::Kind::zero || t.kind == ShapeTerm::Kind::linear || t.height == 0;
  });
}

Interval Shape::support() const {
  Interval s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& t : terms_) {
    if (t.kind == ShapeTerm::Kind::compact_bump) {
      s.lo = std::min(s.lo, t.a - t.b);
      s.hi = std::max(s.hi, t.a + t.b);
    } else if (t.kind == ShapeTerm::Kind::spline_bump) {
      s.lo = std::min(s.lo, t.a);
      s.hi = std::max(s.hi, t.b);
    }
  }
  return s;
}

std::vector<double> Shape::knots() const {
  std::vector<double> k;
  for (const auto& t : terms_) {
    if (t.kind == ShapeTerm::Kind::compact_bump) {
      k.push_back(t.a - t.b);
      k.push_back(t.a + t.b);
    } else if (t.kind == ShapeTerm::Kind::spline_bump) {
      for (int j = 0; j <= 4; ++j) k.push_back(t.a + (t.b - t.a) * j / 4);
    }
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

double Shape::sampled_min() const {
  const auto s = support();
  if (s.lo > s.hi) return value(0);
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 4000; ++j) m = std::min(m, value(s.lo + s.length() * j / 4000));
  return m;
}

std::string to_string(ShapeTerm::Kind k) {
  switch (k) {
    case ShapeTerm::Kind::zero:
      return "zero";
    case ShapeTerm::Kind::linear:
      return "linear";
    case ShapeTerm::Kind::compact_bump:
      return "compact_bump";
    case ShapeTerm::Kind::spline_bump:
      return "spline_bump";
  }
  return "zero";
}

ShapeTerm::Kind shape_kind_from_string(const std::string& name) {
  if (name == "zero") return ShapeTerm::Kind::zero;
  if (name == "linear") return ShapeTerm::Kind::linear;
  if (name == "compact_bump") return ShapeTerm::Kind::compact_bump;
  if (name == "spline_bump") return ShapeTerm::Kind::spline_bump;
  throw ParameterError("unknown shape '" + name + "'");
}

}  // namespace stickygraph
