#pragma once

// Diagnostics on solved (or synthetic) profiles near the slab walls x = 0, 1.

#include <optional>
#include <utility>
#include <vector>

#include "stickygraph/profile.hpp"

namespace stickygraph {

enum class Side { left, right };

struct Rect {
  double x_lo, x_hi, y_lo, y_hi;
  Fill fill;  // full: inside E; empty: outside E
};

struct StickinessReport {
  Side side = Side::left;
  double interior_limit = 0;
  double exterior_value = 0;
  double jump = 0;
  double error_estimate = 0;
  double threshold = 0;
  enum class Verdict { continuous, sticky } verdict = Verdict::continuous;
  std::optional<Rect> clean_region;
};

struct BoundaryLimitOptions {
  double threshold_factor = 10;
  double threshold_floor = 1e-12;  // absolute, guards exactly-zero error estimates
};

/// Interior trace at the wall by a three-point power-law extrapolation
/// L + c d^p over the innermost interior nodes (d = distance to the wall).
StickinessReport boundary_limit(const GraphProfile& profile, Side side, const BoundaryLimitOptions& opts = {});

/// True when every interior node inside the report's clean region lies on
/// the stated side of the rectangle (no graph point crosses it).
bool clean_region_holds(const GraphProfile& profile, const StickinessReport& rep);

struct ExponentFit {
  double exponent = 0;
  double coefficient = 0;
  double r_squared = 0;
  Interval window{0, 0};
  Index n_points = 0;
  std::vector<std::pair<double, double>> points;  // (abscissa, ordinate) used
};

/// Fit window in units of the smallest interior gap at the wall.
struct FitWindow {
  double lo = 4;
  double hi = 40;
  double noise_floor = 1e-14;  // ordinates below this are dropped
  // Wall value subtracted before fitting: the extrapolated trace of u - l x
  // (removes the discretisation offset of the trace), or the exterior datum.
  enum class Reference { interior_trace, exterior_datum } reference = Reference::interior_trace;
};

/// Least-squares fit of log|u(d) - u_wall - l d| against log d, d = distance
/// from the wall, over the interior nodes inside the window.
ExponentFit fit_boundary_exponent(const GraphProfile& profile, double slope, Side side, const FitWindow& w = {});

/// Plain log-log fit of |y| = c x^p on the given points (x > 0).
ExponentFit fit_power_law(const std::vector<std::pair<double, double>>& pts, double noise_floor = 0);

/// Fit of the wall distance against |u - L| on the detached part of a sticky
/// profile, L the interior limit: d = c |u - L|^p.
ExponentFit invert_graph_near_sticky(const GraphProfile& profile, Side side, const FitWindow& w = {});
ExponentFit invert_graph_near_sticky(const GraphProfile& profile, Side side, double limit, const FitWindow& w);

/// u_k(x) = k u(x/k).
GraphProfile blowup_rescale(const GraphProfile& profile, double k);
/// u_eps(x) = (u(x) - l x) / eps.
GraphProfile vertical_rescale(const GraphProfile& profile, double slope, double eps);

struct LevelValue {
  double scale;
  double value;
  double ratio;  // value / previous value; NaN on the first level
};

/// sup over (0, 2^-j) of |u - u_wall - l d| for j = 0..levels (distances to the wall).
std::vector<LevelValue> flatness_profile(const GraphProfile& profile, double slope, Side side, int levels = 12);

/// sup over (-eta^m, eta^m) around x = 0 of |u - u(0) - l x| for m = 1..levels.
std::vector<LevelValue> oscillation_decay(const GraphProfile& profile, double slope, double eta, int levels = 8);

/// Interior piece adjoining the wall on `side` (the piece starting at 0 or ending at 1).
Index interior_piece(const GraphProfile& profile, Side side);
/// Exterior value at the wall on `side`.
double exterior_wall_value(const GraphProfile& profile, Side side);

}  // namespace stickygraph
