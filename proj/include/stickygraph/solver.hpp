#pragma once

// Discrete nonlocal minimal graph in the slab (0,1) x R.
//
// Unknowns are the graph values at interior nodes of a graded grid on [0,1];
// the exterior columns are frozen to v + t*phi. Each residual component is the
// nonlocal curvature at an interior node, so a solution is a discrete graph
// whose curvature vanishes in the slab.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "stickygraph/curvature.hpp"
#include "stickygraph/shapes.hpp"

namespace stickygraph {

using Mat = Eigen::MatrixXd;

struct ExteriorData {
  Shape v;
  Shape phi;
  double t = 0;
  double d = 0.5;         // phi vanishes on (-d, 1+d)
  double window = 8;      // sampled window (-window, window)

  double value(double x) const { return v.value(x) + t * phi.value(x); }
  double slope(double x) const { return v.derivative(x) + t * phi.derivative(x); }
  void validate() const;
};

/// Exterior node layout: geometric from each wall outward.
struct ExteriorMesh {
  double first_gap = 0;   // 0: use the interior grid's smallest gap
  double ratio = 0.8;     // gap ratio toward the wall
  double max_gap = 0.1;
};

struct SlabProblem {
  FracParams params{0.5};
  ExteriorData exterior;
  Grid interior_grid;
  CurvatureQuad quad;
  ExteriorMesh mesh;
};

/// Grid on [0,1] with n nodes, geometric toward both walls.
Grid slab_grid(Index n, double ratio);

/// Linear dependence of a node value or slope on the unknowns.
struct Stencil {
  std::vector<std::pair<Index, double>> terms;
  void add(Index j, double c) { terms.emplace_back(j, c); }
};

/// Frozen exterior, unknown layout and evaluation machinery for one problem.
class DiscreteSystem {
 public:
  explicit DiscreteSystem(SlabProblem problem);

  const SlabProblem& problem() const { return problem_; }
  const Grid& grid() const { return problem_.interior_grid; }
  Index unknowns() const { return grid().size() - 2; }
  /// Abscissae of the unknowns.
  Vec unknown_nodes() const { return grid().nodes.segment(1, unknowns()); }

  /// Linear interpolation of the exterior traces at the walls.
  Vec initial_guess() const;
  /// Full profile (exterior + interior Hermite piece) for an iterate.
  GraphProfile profile(const Vec& u) const;
  /// Interior node values including the extrapolated wall values.
  Vec node_values(const Vec& u) const;

  Vec residual(const Vec& u) const;
  /// Residual together with its Jacobian.
  Vec residual(const Vec& u, Mat& jac) const;
  /// Diagonal of the Jacobian only (Picard scaling).
  Vec jacobian_diagonal(const Vec& u) const;

  const std::vector<Stencil>& value_stencils() const { return value_dep_; }
  const std::vector<Stencil>& slope_stencils() const { return slope_dep_; }
  const ColumnKernel<double>& kernel() const { return kernel_; }
  const PairedQuadrature& rules() const { return rules_; }

 private:
  double row(const GraphProfile& g, Index i, const Vec& u, Eigen::Ref<Eigen::RowVectorXd> jrow, bool want_jac,
             bool diag_only) const;

  SlabProblem problem_;
  Piece left_, right_;
  ExteriorModel left_model_, right_model_;
  std::vector<Stencil> value_dep_, slope_dep_;
  ColumnKernel<double> kernel_;
  PairedQuadrature rules_;
};

DiscreteSystem assemble(const SlabProblem& problem);

struct SolveOptions {
  double tol = 1e-6;
  int max_iter = 60;
  double damping = 0.5;
  int picard_iters = 0;       // Picard steps before Newton
  bool use_newton = true;
  double dominance_slack = 0.05;  // tolerated shortfall in the diagonal dominance check
};

struct SolveReport {
  GraphProfile solution;
  Vec u;
  double residual_inf = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
  std::vector<std::string> steps;  // "newton", "picard", "newton-fallback"
};

Vec picard_step(const DiscreteSystem& sys, const Vec& u, double damping);

struct NewtonOutcome {
  Vec u;
  bool used_newton = false;  // false: fell back to a Picard step
  double residual_inf = 0;
};
NewtonOutcome newton_step(const DiscreteSystem& sys, const Vec& u, double dominance_slack = 0.05);

SolveReport solve(const SlabProblem& problem, const SolveOptions& opts = {});
/// Solve starting from a given iterate (continuation in sweeps).
SolveReport solve(const DiscreteSystem& sys, Vec u0, const SolveOptions& opts = {});

/// True when every row satisfies J_ii >= (1 - slack) sum_{j != i} |J_ij| and J_ii > 0.
bool diagonally_dominant(const Mat& j, double slack);

}  // namespace stickygraph
