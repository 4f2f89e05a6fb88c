#pragma once

// Linear fractional-Laplacian tools on an interval (a,b): the sigma-harmonic
// extension of exterior data through the interval Poisson kernel, direct
// application of (-Delta)^sigma to grid functions, and the Dirichlet source
// problem with zero exterior data.

#include <functional>
#include <vector>

#include "stickygraph/grid.hpp"

namespace stickygraph {

/// Grid function on an interval; values include both walls. Between nodes
/// the function is the C1 Hermite interpolant with three-point slopes.
struct LinearProfile {
  Grid grid;
  Vec values;
  double sigma = 0.75;

  void validate() const;
  double value(double x) const;
};

/// Data prescribed on the complement of the interval.
struct ExteriorFunction {
  std::function<double(double)> value;
  std::vector<double> knots;  // points where `value` is not smooth

  static ExteriorFunction zero();
  static ExteriorFunction constant(double c);
};

struct LinearQuad {
  double truncation = 1e3;  // exterior integrals are numeric up to this distance
  double r_pair = 0.1;      // singular panel, relative to the local gap
  int n_near = 16;
  int n_mid = 12;
  double panel_ratio = 1.5;
};

/// 4^sigma Gamma(1/2+sigma) / (sqrt(pi) |Gamma(-sigma)|).
double frac_laplacian_constant(double sigma);

/// sigma-harmonic function in (a,b) equal to g outside. Beyond the truncation
/// radius g is continued linearly and that remainder is integrated in closed
/// form; its size is returned through `remainder` when requested.
LinearProfile poisson_extension(const ExteriorFunction& g, double sigma, const Grid& grid, const LinearQuad& q = {},
                                double* remainder = nullptr);

/// Row form of (-Delta)^sigma at the interior nodes: result = M * values + c,
/// with c collecting the exterior contribution.
struct FracLaplacianRows {
  Eigen::MatrixXd M;  // (n-2) x n, columns indexed by grid node
  Vec exterior;       // n-2
};

FracLaplacianRows frac_laplacian_rows(const Grid& grid, const ExteriorFunction& ext, double sigma,
                                      const LinearQuad& q = {});

/// (-Delta)^sigma f at the interior nodes, standard normalisation.
Vec frac_laplacian_apply(const LinearProfile& f, const ExteriorFunction& ext, const LinearQuad& q = {});

/// (-Delta)^sigma u = h in (a,b), u = 0 outside, by collocation at the
/// interior nodes. Wall values are zero.
LinearProfile dirichlet_solve(const std::function<double(double)>& h, double sigma, const Grid& grid,
                              const LinearQuad& q = {});
LinearProfile dirichlet_solve(const Vec& h_interior, double sigma, const Grid& grid, const LinearQuad& q = {});

}  // namespace stickygraph
