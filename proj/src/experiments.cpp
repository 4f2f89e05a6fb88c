#include "stickygraph/experiments.hpp"

#include <cmath>
#include <limits>

#include "stickygraph/errors.hpp"

namespace stickygraph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wall_x(Side side) { return side == Side::left ? 0.0 : 1.0; }

bool is_sticky(const StickinessReport& r) { return r.verdict == StickinessReport::Verdict::sticky; }

// Solve with a warm start, falling back to the linear initial guess when the
// warm iterate diverges.
SolveReport solve_from(const DiscreteSystem& sys, const std::optional<Vec>& warm, const SolveOptions& opts) {
  if (warm && warm->size() == sys.unknowns()) {
    try {
      auto rep = solve(sys, *warm, opts);
      if (rep.converged) return rep;
    } catch (const DivergenceError&) {
    }
  }
  return solve(sys, sys.initial_guess(), opts);
}

std::string side_name(Side s) { return s == Side::left ? "left" : "right"; }

}  // namespace

void ExperimentConfig::validate() const {
  if (grid.n < 17) throw ParameterError("grid.n must be at least 17");
  if (!(grid.ratio > 0 && grid.ratio <= 1)) throw ParameterError("grid.ratio must lie in (0, 1]");
  if (t_values.empty()) throw ParameterError("t_values must not be empty");
  for (std::size_t k = 0; k < t_values.size(); ++k) {
    if (!(t_values[k] >= 0)) throw ParameterError("t_values must be nonnegative");
    if (k > 0 && !(t_values[k] > t_values[k - 1])) throw ParameterError("t_values: ascending required");
  }
  if (!(r_tail > 2)) throw ParameterError("quad.R_tail must exceed 2");
  if (!(quad.r_pair > 0 && quad.r_pair < 1)) throw ParameterError("quad.r_pair must lie in (0, 1)");
  if (quad.n_near < 2 || quad.n_mid < 2) throw ParameterError("quad.n_near and quad.n_mid must be at least 2");
  problem(t_values.back()).exterior.validate();
}

SlabProblem ExperimentConfig::problem(double t) const {
  SlabProblem p;
  p.params = params;
  p.exterior.v = v;
  p.exterior.phi = phi;
  p.exterior.t = t;
  p.exterior.d = d;
  p.exterior.window = r_tail;
  p.interior_grid = slab_grid(grid.n, grid.ratio);
  p.quad = quad;
  return p;
}

ProfileSnapshot snapshot(const DiscreteSystem& sys, const Vec& u) {
  const Vec v = sys.node_values(u);
  ProfileSnapshot s;
  s.x.assign(sys.grid().nodes.data(), sys.grid().nodes.data() + sys.grid().size());
  s.u.assign(v.data(), v.data() + v.size());
  return s;
}

// ---- genericity ----

GenericityReport run_genericity(const ExperimentConfig& config) {
  config.validate();
  if (config.t_values.front() != 0) throw ParameterError("genericity: t_values must start at 0");
  GenericityReport rep;
  std::optional<Vec> warm;
  for (double t : config.t_values) {
    const DiscreteSystem sys(config.problem(t));
    SolveReport s;
    try {
      s = solve_from(sys, warm, config.solve);
    } catch (const DivergenceError& e) {
      rep.failures.push_back("t=" + std::to_string(t) + ": " + e.what());
      rep.aborted = true;
      return rep;
    }
    SweepRow row;
    row.t = t;
    row.residual_inf = s.residual_inf;
    row.iterations = s.iterations;
    row.converged = s.converged;
    row.profile = snapshot(sys, s.u);
    if (!s.converged) {
      rep.rows.push_back(std::move(row));
      rep.failures.push_back("t=" + std::to_string(t) + ": solve did not converge");
      rep.aborted = true;
      return rep;
    }
    row.left = boundary_limit(s.solution, Side::left);
    row.right = boundary_limit(s.solution, Side::right);
    warm = s.u;
    rep.rows.push_back(std::move(row));
  }

  const auto& first = rep.rows.front();
  for (const auto* r : {&first.left, &first.right}) {
    if (is_sticky(*r)) rep.failures.push_back("t=0: " + side_name(r->side) + " jump above threshold");
  }
  // phi >= 0 lifts the graph, so the jumps are upward on both sides.
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const auto& r = rep.rows[k];
    const auto& prev = rep.rows[k - 1];
    for (Side side : {Side::left, Side::right}) {
      const auto& cur = side == Side::left ? r.left : r.right;
      const auto& old = side == Side::left ? prev.left : prev.right;
      const std::string at = "t=" + std::to_string(r.t) + " " + side_name(side) + ": ";
      if (!(is_sticky(cur) && cur.jump > 0)) rep.failures.push_back(at + "no positive jump above threshold");
      if (!(cur.jump > old.jump)) rep.failures.push_back(at + "jump not increasing in t");
    }
    for (std::size_t i = 0; i < r.profile.u.size(); ++i) {
      if (r.profile.u[i] < prev.profile.u[i] - config.solve.tol) {
        rep.failures.push_back("t=" + std::to_string(r.t) + ": solution below the previous t at x=" +
                               std::to_string(r.profile.x[i]));
        break;
      }
    }
  }
  return rep;
}

// ---- boundary alternative ----

std::string to_string(SideClassification::Branch b) {
  switch (b) {
    case SideClassification::Branch::continuous:
      return "continuous";
    case SideClassification::Branch::sticky:
      return "sticky";
    default:
      return "inconclusive";
  }
}

namespace {

// Least squares u - u_wall - l d = A d^sigma + B d^(1+sigma) on [lo, hi].
std::pair<double, double> leading_terms(const Grid& g, const Vec& values, Side side, double u_wall, double slope,
                                        double sigma, double lo, double hi) {
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  int used = 0;
  for (Index k = 0; k < g.size(); ++k) {
    const double d = side == Side::left ? g.nodes(k) : 1 - g.nodes(k);
    if (d < lo || d > hi) continue;
    const double p = std::pow(d, sigma), q = p * d;
    const double y = values(k) - u_wall - slope * (side == Side::left ? d : -d);
    M(0, 0) += p * p;
    M(0, 1) += p * q;
    M(1, 1) += q * q;
    rhs(0) += p * y;
    rhs(1) += q * y;
    ++used;
  }
  if (used < 4) throw DegenerateFitError("tuning: fewer than 4 nodes in the fit window");
  M(1, 0) = M(0, 1);
  const Eigen::Vector2d c = M.ldlt().solve(rhs);
  return {c(0), c(1)};
}

SideClassification classify(const GraphProfile& prof, const ExteriorData& ext, Side side, const FracParams& p,
                            const FitWindow& window) {
  SideClassification c;
  c.side = side;
  c.target = 1 + p.sigma;
  c.limit = boundary_limit(prof, side);
  try {
    if (is_sticky(c.limit)) {
      c.fit = invert_graph_near_sticky(prof, side, c.limit.interior_limit, window);
      c.branch = SideClassification::Branch::sticky;
    } else {
      c.fit = fit_boundary_exponent(prof, ext.slope(wall_x(side)), side, window);
      c.branch = SideClassification::Branch::continuous;
    }
  } catch (const InversionError& e) {
    c.note = e.what();
  } catch (const DegenerateFitError& e) {
    c.note = e.what();
  }
  return c;
}

}  // namespace

AlternativeReport run_alternative(const ExperimentConfig& config, const std::optional<FlatWallTuning>& tuning,
                                  const FitWindow& window) {
  config.validate();
  const double t = config.t_values.back();
  const double sigma = config.params.sigma;
  AlternativeReport rep;
  rep.s = config.params.s;

  auto with_amplitude = [&](double a) {
    ExperimentConfig c = config;
    c.v = config.v + tuning->probe.scaled(a);
    return c;
  };

  std::optional<Vec> warm;
  auto run = [&](const ExperimentConfig& c, SolveReport& out) {
    const DiscreteSystem sys(c.problem(t));
    out = solve_from(sys, warm, c.solve);
    if (!out.converged) throw DivergenceError("alternative: solve did not converge", "");
    warm = out.u;
    return sys.node_values(out.u);
  };

  ExperimentConfig final_cfg = config;
  SolveReport solved;
  if (tuning) {
    const auto& tu = *tuning;
    auto coefficient = [&](double a, double* b_out) {
      const ExperimentConfig c = with_amplitude(a);
      const Vec vals = run(c, solved);
      const auto prob = c.problem(t);
      const double w = wall_x(tu.side);
      const auto [A, B] = leading_terms(prob.interior_grid, vals, tu.side, prob.exterior.value(w),
                                        prob.exterior.slope(w), sigma, tu.fit_lo, tu.fit_hi);
      rep.tuning_history.emplace_back(a, A);
      if (b_out) *b_out = B;
      return A;
    };
    double a0 = tu.a0, a1 = tu.a1, B = 0;
    double A0 = coefficient(a0, nullptr), A1 = coefficient(a1, &B);
    for (int it = 0; it < tu.max_iter && std::abs(A1) > tu.rel_tol * std::abs(B); ++it) {
      if (A1 == A0) break;
      const double a2 = a1 - A1 * (a1 - a0) / (A1 - A0);
      if (!std::isfinite(a2)) break;
      a0 = a1;
      A0 = A1;
      a1 = a2;
      A1 = coefficient(a1, &B);
    }
    // The last solve is at a1.
    rep.amplitude = a1;
    rep.leading_coefficient = A1;
    final_cfg = with_amplitude(a1);
  } else {
    run(config, solved);
    rep.leading_coefficient = kNaN;
  }

  const auto prob = final_cfg.problem(t);
  const DiscreteSystem sys(prob);
  rep.residual_inf = solved.residual_inf;
  rep.profile = snapshot(sys, solved.u);
  rep.left = classify(solved.solution, prob.exterior, Side::left, config.params, window);
  rep.right = classify(solved.solution, prob.exterior, Side::right, config.params, window);
  return rep;
}

// ---- corner barrier ----

void BarrierParams::validate(const FracParams& p) const {
  if (!(ell_tilde > 0)) throw ParameterError("barrier: ell_tilde must be positive");
  if (!(std::abs(ell_bar) <= ell_tilde)) throw ParameterError("barrier: |ell_bar| must not exceed ell_tilde");
  if (!(lambda > 0 && lambda < L)) throw ParameterError("barrier: lambda must lie in (0, L)");
  if (!(a > 0 && b > 0 && c > 0)) throw ParameterError("barrier: a, b, c must be positive");
  if (!(alpha > 0 && alpha < p.s)) throw ParameterError("barrier: alpha must lie in (0, s)");
  if (!(eps > 0 && eps < 1)) throw ParameterError("barrier: eps must lie in (0, 1)");
  if (!(L >= c / std::pow(eps, 1 / p.s))) {
    throw ParameterError("barrier: L must satisfy L >= c / eps^(1/s) = " + std::to_string(c / std::pow(eps, 1 / p.s)));
  }
  if (!(mu_probe > 0 && mu_probe < lambda / 8)) throw ParameterError("barrier: mu_probe must lie in (0, lambda/8)");
}

double BarrierParams::value(double x1) const {
  if (x1 <= -L || x1 >= L) return -std::numeric_limits<double>::infinity();
  if (x1 < 0) return ell_bar * x1;
  if (x1 <= lambda) return (ell_bar + eps * a) * x1;
  return ell_bar * x1 - eps * b * std::pow(x1, 1 + alpha);
}

namespace {

GraphProfile barrier_profile(const BarrierParams& bp) {
  auto nodes = [](double lo, double hi, double first) {
    return make_stretched_grid({lo, hi}, first, 0.8, 0.05 * (hi - lo)).nodes;
  };
  const Vec left = -nodes(0, bp.L, 1e-10).reverse();
  const Vec mid = nodes(0, bp.lambda, 1e-10);
  const Vec right = nodes(bp.lambda, bp.L, 1e-3);
  const double l = bp.ell_bar, k = bp.ell_bar + bp.eps * bp.a;
  const double eb = bp.eps * bp.b, al = bp.alpha;
  return GraphProfile({Piece::function(left, [l](double x) { return l * x; }, [l](double) { return l; }),
                       Piece::function(mid, [k](double x) { return k * x; }, [k](double) { return k; }),
                       Piece::function(
                           right, [=](double x) { return l * x - eb * std::pow(x, 1 + al); },
                           [=](double x) { return l - eb * (1 + al) * std::pow(x, al); })},
                      ExteriorModel::empty(), ExteriorModel::empty());
}

}  // namespace

double barrier_curvature(const FracParams& p, const BarrierParams& bp, double x1) {
  if (!(x1 > 0 && x1 < bp.lambda)) throw DomainError("barrier: probe must lie in (0, lambda)");
  const auto g = barrier_profile(bp);
  return nmc_graph(g, {x1, bp.value(x1)}, p).value;
}

BarrierReport run_barrier_check(const FracParams& p, const BarrierParams& bp, int probes, int brute_probes) {
  bp.validate(p);
  if (probes < 8) throw ParameterError("barrier: at least 8 probes required");
  const auto g = barrier_profile(bp);
  BarrierReport rep;
  rep.max_value = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= probes; ++k) {
    BarrierProbe pr;
    pr.x1 = bp.mu_probe * std::ldexp(1.0, -k);
    pr.column = nmc_graph(g, {pr.x1, bp.value(pr.x1)}, p).value;
    if (k <= brute_probes) {
      RadialPanels rad;
      rad.tangent_angle = std::atan(bp.ell_bar + bp.eps * bp.a);
      rad.rho0 = std::min(rad.rho0, pr.x1 / 4);
      const Indicator inside = [&bp](double y1, double y2) { return y2 < bp.value(y1); };
      pr.bruteforce = nmc_bruteforce2d(inside, {pr.x1, bp.value(pr.x1)}, p, rad);
      rep.max_bruteforce_gap = std::max(rep.max_bruteforce_gap, std::abs(*pr.bruteforce - pr.column));
    }
    rep.max_value = std::max(rep.max_value, pr.column);
    rep.probes.push_back(pr);
  }
  rep.all_nonpositive = rep.max_value <= 0;

  // Probes run outward-in; locate the first sign change and bisect it.
  double lo = 0, hi = 0;
  for (const auto& pr : rep.probes) {
    if (pr.column <= 0) {
      lo = pr.x1;
      break;
    }
    hi = pr.x1;
  }
  if (lo > 0 && hi > 0) {
    for (int it = 0; it < 30 && hi - lo > 1e-4 * lo; ++it) {
      const double m = std::sqrt(lo * hi);
      (nmc_graph(g, {m, bp.value(m)}, p).value <= 0 ? lo : hi) = m;
    }
  }
  rep.crossover = hi == 0 ? bp.mu_probe : lo;
  return rep;
}

// ---- linearized limit ----

LinearizationReport run_linearization(const ExperimentConfig& config, double slope, const std::vector<double>& eps) {
  if (eps.empty()) throw ParameterError("linearization: empty eps sweep");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0)) throw ParameterError("linearization: eps must be positive");
    if (k > 0 && !(eps[k] < eps[k - 1])) throw ParameterError("linearization: eps must be descending");
  }
  ExperimentConfig base = config;
  base.v = Shape::linear(slope, 0);
  base.t_values = {eps.front()};
  base.validate();

  LinearizationReport rep;
  rep.slope = slope;
  rep.sigma = config.params.sigma;
  const Grid grid = slab_grid(config.grid.n, config.grid.ratio);
  const Shape g = config.phi;
  const ExteriorFunction ext{[g](double y) { return g.value(y); }, g.knots()};
  const LinearProfile ubar = poisson_extension(ext, rep.sigma, grid);
  rep.limit.x.assign(grid.nodes.data(), grid.nodes.data() + grid.size());
  rep.limit.u.assign(ubar.values.data(), ubar.values.data() + grid.size());

  std::optional<Vec> warm;
  double prev_eps = 0;
  for (double e : eps) {
    const DiscreteSystem sys(base.problem(e));
    if (warm) {
      // Rescale the previous deviation from the tilt to the new eps.
      const Vec x = sys.unknown_nodes();
      *warm = slope * x + (e / prev_eps) * (*warm - slope * x);
    }
    const auto s = solve_from(sys, warm, base.solve);
    if (!s.converged) throw DivergenceError("linearization: solve did not converge at eps=" + std::to_string(e), "");
    warm = s.u;
    prev_eps = e;
    const Vec vals = sys.node_values(s.u);
    LinearizationRow row;
    row.eps = e;
    row.residual_inf = s.residual_inf;
    row.iterations = s.iterations;
    for (Index k = 1; k + 1 < grid.size(); ++k) {
      const double ue = (vals(k) - slope * grid.nodes(k)) / e;
      row.sup_distance = std::max(row.sup_distance, std::abs(ue - ubar.values(k)));
    }
    rep.rows.push_back(row);
  }
  rep.decreasing = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    if (!(rep.rows[k].sup_distance < rep.rows[k - 1].sup_distance)) rep.decreasing = false;
  }
  return rep;
}

// ---- boundary equation ----

BoundaryEqReport run_boundary_equation(const SlabProblem& problem, const SolveReport& solved,
                                       const BoundaryEqOptions& opts) {
  if (opts.approach_nodes < 2) throw ParameterError("boundary equation: need at least 2 approach nodes");
  const DiscreteSystem sys(problem);
  const GraphProfile& prof = solved.solution;
  const Vec vals = sys.node_values(solved.u);
  const Grid& g = sys.grid();
  const Index n = g.size();
  BoundaryEqReport rep;
  rep.side = opts.side;
  rep.tol = opts.tol;
  const auto lim = boundary_limit(prof, opts.side);
  rep.sticky = is_sticky(lim);

  for (int j = opts.approach_nodes; j >= 1; --j) {
    const Index k = opts.side == Side::left ? j : n - 1 - j;
    const double d = opts.side == Side::left ? g.nodes(k) : 1 - g.nodes(k);
    const double h = nmc_graph(prof, {g.nodes(k), vals(k)}, problem.params, problem.quad).value;
    rep.approach.emplace_back(d, std::abs(h));
    rep.max_abs = std::max(rep.max_abs, std::abs(h));
  }
  if (rep.sticky) {
    // Below the scale of the jump the set is the half plane on the interior
    // side of the wall: the inverse graph leaves the limit point vertically.
    const Indicator inside = [&prof](double y1, double y2) { return y2 < prof.value(y1); };
    RadialPanels rad;
    rad.tangent_angle = std::acos(-1.0) / 2;
    rad.rho0 = std::min(rad.rho0, std::abs(lim.jump) / 16);
    rep.limit_point_value = nmc_bruteforce2d(inside, {wall_x(opts.side), lim.interior_limit}, problem.params, rad);
    rep.max_abs = std::max(rep.max_abs, std::abs(rep.limit_point_value));
  }
  return rep;
}

BoundaryEqReport run_boundary_equation(const ExperimentConfig& config, const BoundaryEqOptions& opts) {
  config.validate();
  const auto prob = config.problem(config.t_values.back());
  const auto s = solve(prob, config.solve);
  if (!s.converged) throw DivergenceError("boundary equation: solve did not converge", "");
  return run_boundary_equation(prob, s, opts);
}

}  // namespace stickygraph
