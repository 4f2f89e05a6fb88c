#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "stickygraph/grid.hpp"

namespace stickygraph {

struct Point {
  double x1;
  double x2;
};

/// Column state: a finite graph value, or an empty (-inf) / full (+inf) column.
enum class Fill { finite, empty, full };

/// How the graph continues beyond the sampled window.
struct ExteriorModel {
  enum class Kind { linear, empty, full, sampled };
  Kind kind = Kind::linear;
  double slope = 0;   // linear: u(y) = slope * y + offset
  double offset = 0;
  std::function<double(double)> extension;  // sampled: evaluated numerically

  static ExteriorModel linear(double slope, double offset) { return {Kind::linear, slope, offset, {}}; }
  static ExteriorModel empty() { return {Kind::empty, 0, 0, {}}; }
  static ExteriorModel full() { return {Kind::full, 0, 0, {}}; }
  static ExteriorModel sampled(std::function<double(double)> fn) {
    return {Kind::sampled, 0, 0, std::move(fn)};
  }

  double value(double y) const;
};

/// One smooth stretch of the graph between two break points.
///
/// Values between nodes come from cubic Hermite interpolation of (u, du), or
/// from `fn` when it is set (exact data such as a prescribed exterior datum).
/// Empty/full pieces carry only their node abscissae.
struct Piece {
  Vec x;
  Vec u;
  Vec du;
  Fill fill = Fill::finite;
  std::function<double(double)> fn;

  static Piece hermite(Vec x, Vec u, Vec du);
  /// Hermite piece with slopes from the three-point parabola at interior
  /// nodes and one-sided three-point formulas at the ends.
  static Piece interpolating(Vec x, Vec u);
  /// Exact piece; `dfn` gives the end slopes used for smooth-join checks.
  static Piece function(Vec x, std::function<double(double)> fn, std::function<double(double)> dfn);
  static Piece filled(double lo, double hi, Fill f);

  double lo() const { return x(0); }
  double hi() const { return x(x.size() - 1); }
  Index nodes() const { return x.size(); }
  Index segment(double y) const;
  double value(double y) const;
  double value_in(Index seg, double y) const;
  bool exact() const { return bool(fn); }
};

/// Graph of a function over a finite window plus exterior models on both sides.
///
/// Pieces are contiguous: pieces[k].hi() == pieces[k+1].lo(). A break may
/// carry a jump; evaluation of the PV curvature there is refused.
class GraphProfile {
 public:
  GraphProfile() = default;
  GraphProfile(std::vector<Piece> pieces, ExteriorModel left, ExteriorModel right);

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::vector<Piece>& pieces() { return pieces_; }
  const ExteriorModel& left() const { return left_; }
  const ExteriorModel& right() const { return right_; }
  Interval window() const { return {pieces_.front().lo(), pieces_.back().hi()}; }

  /// Piece index containing y (the right-hand piece at a break).
  Index piece_at(double y) const;
  /// Extended-real graph value; -inf for empty, +inf for full columns.
  double value(double y) const;
  Fill fill_at(double y) const;

  /// All node abscissae, each break listed once.
  Grid grid() const;
  /// Node values matching grid(); at breaks the right-hand value.
  Vec values() const;

  /// True when y is a break with a jump or a slope mismatch.
  bool is_singular(double y, double rel_tol = 1e-10) const;

 private:
  void validate() const;

  std::vector<Piece> pieces_;
  ExteriorModel left_;
  ExteriorModel right_;
};

/// Weights of the node values in the three-point slope at node k
/// (centred parabola inside, one-sided parabola at the two ends).
std::array<std::pair<Index, double>, 3> slope_weights(const Vec& x, Index k);

/// Cubic Hermite basis on one segment.
struct HermiteBasis {
  double h00, h10, h01, h11;
  static HermiteBasis at(double tau) {
    const double om = 1 - tau;
    return {(1 + 2 * tau) * om * om, tau * om * om, tau * tau * (3 - 2 * tau), tau * tau * (tau - 1)};
  }
};

/// Taylor coefficients of a Hermite cubic at an interior abscissa:
/// p(x+d) - p(x) = d (c1 + d (c2 + d c3)).
struct LocalExpansion {
  double c1, c2, c3;
  double tau, h;
  static LocalExpansion of(double u0, double d0, double u1, double d1, double h, double tau0);
  double slope_at(double d) const { return c1 + d * (c2 + d * c3); }
  /// Derivatives of slope_at(d) with respect to (u0, d0, u1, d1).
  std::array<double, 4> gradient(double d) const;
};

}  // namespace stickygraph
