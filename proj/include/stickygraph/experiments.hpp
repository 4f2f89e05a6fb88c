#pragma once

// Scenario runners: each binds the solver and the wall diagnostics into one
// of the experiments (genericity sweep, boundary alternative, corner barrier,
// linearized limit, boundary equation) and returns a plain report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stickygraph/analysis.hpp"
#include "stickygraph/linear_frac.hpp"
#include "stickygraph/solver.hpp"

namespace stickygraph {

struct GridSpec {
  Index n = 129;
  double ratio = 0.75;
};

struct ExperimentConfig {
  FracParams params{0.5};
  Shape v;
  Shape phi;
  double d = 0.5;
  std::vector<double> t_values{0.0};
  GridSpec grid;
  CurvatureQuad quad;
  double r_tail = 8;  // sampled exterior window (-r_tail, r_tail)
  SolveOptions solve;
  std::string out_dir = "out";
  std::uint64_t seed = 0;

  void validate() const;
  SlabProblem problem(double t) const;
};

/// Node values of a solved profile, kept for replay.
struct ProfileSnapshot {
  std::vector<double> x;
  std::vector<double> u;
};

ProfileSnapshot snapshot(const DiscreteSystem& sys, const Vec& u);

// ---- genericity ----

struct SweepRow {
  double t = 0;
  StickinessReport left, right;
  double residual_inf = 0;
  int iterations = 0;
  bool converged = false;
  ProfileSnapshot profile;
};

struct GenericityReport {
  std::vector<SweepRow> rows;
  std::vector<std::string> failures;  // empty when every assertion holds
  bool aborted = false;
  bool passed() const { return failures.empty() && !aborted; }
};

/// Continuation in t (each solve warm-started from the previous one).
GenericityReport run_genericity(const ExperimentConfig& config);

// ---- boundary alternative ----

/// Secant search on the amplitude a of exterior data v + a * probe so that the
/// x^sigma coefficient of u - v(0) - l d at the chosen wall vanishes.
struct FlatWallTuning {
  Shape probe;
  Side side = Side::left;
  double a0 = 0.5, a1 = 1.0;
  int max_iter = 10;
  double fit_lo = 1e-3, fit_hi = 3e-2;  // least-squares window in d
  double rel_tol = 1e-9;                // |A| / |B| at convergence
};

struct SideClassification {
  Side side = Side::left;
  enum class Branch { continuous, sticky, inconclusive } branch = Branch::inconclusive;
  StickinessReport limit;
  std::optional<ExponentFit> fit;  // exponent fit (continuous) or inverse fit (sticky)
  double target = 0;               // 1 + (1+s)/2
  std::string note;
};

struct AlternativeReport {
  double s = 0.5;
  std::optional<double> amplitude;  // tuned a, when tuning was requested
  double leading_coefficient = 0;   // x^sigma coefficient at the tuned wall
  std::vector<std::pair<double, double>> tuning_history;  // (a, coefficient)
  double residual_inf = 0;
  SideClassification left, right;
  ProfileSnapshot profile;
};

/// Solves at the last t value of the config and classifies both walls.
AlternativeReport run_alternative(const ExperimentConfig& config, const std::optional<FlatWallTuning>& tuning = {},
                                  const FitWindow& window = {});

std::string to_string(SideClassification::Branch b);

// ---- corner barrier ----

struct BarrierParams {
  double ell_bar = 0;
  double ell_tilde = 1;  // bound on |ell_bar|
  double lambda = 0.5;
  double L = 5000;
  double a = 1, b = 10, c = 0.5;
  double eps = 0.01;
  double alpha = 0.25;
  double mu_probe = 0.5 / 16;

  void validate(const FracParams& p) const;
  double value(double x1) const;
};

struct BarrierProbe {
  double x1 = 0;
  double column = 0;                 // column formula
  std::optional<double> bruteforce;  // 2D cross-check
};

struct BarrierReport {
  std::vector<BarrierProbe> probes;
  double max_value = 0;
  double crossover = 0;  // largest probe abscissa with value <= 0 found by bisection (0 if none)
  double max_bruteforce_gap = 0;
  bool all_nonpositive = false;
};

/// Probes at mu_probe * 2^-k, k = 1..probes; brute-force at the outermost two.
BarrierReport run_barrier_check(const FracParams& p, const BarrierParams& bp, int probes = 8, int brute_probes = 2);

/// Column-formula value at x1 on the barrier graph.
double barrier_curvature(const FracParams& p, const BarrierParams& bp, double x1);

// ---- linearized limit ----

struct LinearizationRow {
  double eps = 0;
  double sup_distance = 0;
  double residual_inf = 0;
  int iterations = 0;
};

struct LinearizationReport {
  double slope = 0;
  double sigma = 0;
  std::vector<LinearizationRow> rows;
  ProfileSnapshot limit;  // sigma-harmonic extension of g on the grid
  bool decreasing = false;
};

/// Exterior data slope * x + eps * g with g = config.phi; eps descending.
LinearizationReport run_linearization(const ExperimentConfig& config, double slope, const std::vector<double>& eps);

// ---- boundary equation ----

struct BoundaryEqReport {
  Side side = Side::left;
  bool sticky = false;
  std::vector<std::pair<double, double>> approach;  // (distance to wall, |H|)
  double limit_point_value = 0;                      // sticky: brute force at (wall, L)
  double max_abs = 0;
  double tol = 1e-3;
  bool passed() const { return max_abs <= tol; }
};

struct BoundaryEqOptions {
  Side side = Side::left;
  int approach_nodes = 8;
  double tol = 1e-3;
};

BoundaryEqReport run_boundary_equation(const SlabProblem& problem, const SolveReport& solved,
                                       const BoundaryEqOptions& opts = {});
/// Solves the config at its last t value first.
BoundaryEqReport run_boundary_equation(const ExperimentConfig& config, const BoundaryEqOptions& opts = {});

}  // namespace stickygraph
