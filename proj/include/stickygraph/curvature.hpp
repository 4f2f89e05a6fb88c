#pragma once

// Nonlocal mean curvature of a planar subgraph E = {x2 < u(x1)}:
//
//   H(x) = PV int (chi_{E^c} - chi_E)(y) |x-y|^{-2-s} dy.
//
// Integrating each vertical column in closed form leaves a 1D principal value
//
//   H(x) = int_0^inf [W(x1+t) + W(x1-t)] dt,
//   W(y) = -2 F((u(y)-x2)/|y-x1|) |y-x1|^{-1-s},
//
// with empty (u = -inf) and full (u = +inf) columns weighted by +-2 F_inf.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "stickygraph/frac_params.hpp"
#include "stickygraph/kernel.hpp"
#include "stickygraph/profile.hpp"
#include "stickygraph/pv_quadrature.hpp"

namespace stickygraph {

enum class PvModel { paired, paired_local_slope };

struct CurvatureQuad {
  double r_pair = 0.1;   // near panel, as a fraction of the distance to the nearest node
  int n_near = 16;
  int n_mid = 10;
  double R_tail = 1e3;   // truncation radius for sampled exteriors
  PvModel pv_model = PvModel::paired;
  double panel_ratio = 1.5;

  void validate() const;
};

struct CurvatureReport {
  double value = 0;
  double near = 0;
  double mid = 0;
  double tail = 0;
  double est_quadrature_error = 0;
  CurvatureQuad quad;
};

/// Signed column weight -2 F((u_col - x2)/|x1-y1|) |x1-y1|^{-1-s}.
double column_weight(double u_col, Point x, double y1, const FracParams& p);

/// Geometry of a profile seen from one evaluation point.
///
/// Samples at x1 +- t return the column slope q = (u(y)-x2)/t; in the
/// segments touching x1 the difference u(y)-u(x1) comes from the local
/// Taylor form of the Hermite cubic, so no cancellation occurs as t -> 0.
class GraphSampler {
 public:
  struct Sample {
    bool inside = false;  // y inside the window
    Fill fill = Fill::finite;
    double q = 0;
    Index piece = -1;
    Index seg = -1;
    double tau = 0;        // position of y in its segment
    bool adjacent = false; // q came from the local expansion
    int side = 0;
  };

  GraphSampler(const GraphProfile& g, Point at);

  Sample sample(int side, double t) const;
  /// Sorted distances from x1 to every node inside the window.
  const std::vector<double>& breaks() const { return breaks_; }
  /// Distance to the nearest node other than x1 itself.
  double local_gap() const { return local_gap_; }
  double d_left() const { return d_left_; }
  double d_right() const { return d_right_; }
  const GraphProfile& profile() const { return *g_; }
  Point at() const { return at_; }

  struct Adjacent {
    bool active = false;
    Index piece = -1;
    Index seg = -1;
    LocalExpansion e{};
    double tau0 = 0;
  };
  const Adjacent& adjacent(int side) const { return side > 0 ? right_ : left_; }

 private:
  const GraphProfile* g_;
  Point at_;
  double d_left_ = 0, d_right_ = 0, local_gap_ = 0;
  std::vector<double> breaks_;
  Adjacent left_, right_;
};

/// Column-reduced PV curvature at a point of the graph.
CurvatureReport nmc_graph(const GraphProfile& profile, Point at, const FracParams& p, const CurvatureQuad& q = {});

/// Same value without the error estimate; the solver's inner loop.
double nmc_value(const GraphProfile& profile, Point at, const FracParams& p, const CurvatureQuad& q,
                 const ColumnKernel<double>& kernel, const PairedQuadrature& rules);

/// Contribution of the columns beyond horizontal distance d on one side
/// (side = -1 left, +1 right) for the given exterior model.
/// `dx2`, when given, receives the derivative with respect to x2.
double side_tail(const ExteriorModel& m, Point at, double d, int side, const FracParams& p,
                 const ColumnKernel<double>& kernel, const CurvatureQuad& q, double* dx2 = nullptr,
                 double* err = nullptr);

/// Both-side tail beyond distances d_minus (left) and d_plus (right).
double tail_contribution(const ExteriorModel& left, const ExteriorModel& right, Point at, double d_minus,
                         double d_plus, const FracParams& p, const CurvatureQuad& q = {});
/// One model continued on both sides, from the same radius.
double tail_contribution(const ExteriorModel& m, Point at, double from_radius, const FracParams& p,
                         const CurvatureQuad& q = {});

/// Radial set-up for the brute-force evaluator.
struct RadialPanels {
  double rho0 = 1e-3;      // innermost radius; Richardson-extrapolated with rho0/2
  double r_max = 1e7;
  double growth = 1.06;    // ray scan factor
  double theta_tol = 1e-8;
  // Direction angle of the tangent line at the point. Estimated from the
  // indicator on a small circle when absent.
  std::optional<double> tangent_angle;
  int max_depth = 18;
};

using Indicator = std::function<bool(double, double)>;

/// Direct polar quadrature of (chi_{E^c} - chi_E)|x-y|^{-2-s} with the tangent
/// halfplane subtracted; E is the region where `inside(y1, y2)` holds.
double nmc_bruteforce2d(const Indicator& inside, Point at, const FracParams& p, const RadialPanels& annuli = {});

}  // namespace stickygraph
