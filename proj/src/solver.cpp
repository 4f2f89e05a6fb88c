#include "stickygraph/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stickygraph/errors.hpp"

namespace stickygraph {

namespace {

constexpr Index kInteriorPiece = 1;

std::string dump_vector(const Vec& u) {
  std::ostringstream os;
  os.precision(17);
  for (Index i = 0; i < u.size(); ++i) os << (i ? "," : "") << u(i);
  return os.str();
}

// Nodes on [0, R] graded from 0 outward, with the shape knots inserted.
Vec exterior_nodes(double first_gap, const ExteriorMesh& mesh, double R, const std::vector<double>& knots) {
  const Grid g = make_stretched_grid({0, R}, first_gap, mesh.ratio, mesh.max_gap);
  std::vector<double> pts(g.nodes.data(), g.nodes.data() + g.size());
  for (double k : knots) {
    if (!(k > 0 && k < R)) continue;
    const Index j = g.locate(k);
    const double gap = g.nodes(j + 1) - g.nodes(j);
    pts.erase(std::remove_if(pts.begin(), pts.end(),
                             [&](double p) { return p > 0 && p < R && std::abs(p - k) < 0.25 * gap; }),
              pts.end());
    pts.push_back(k);
  }
  std::sort(pts.begin(), pts.end());
  return Eigen::Map<Vec>(pts.data(), Index(pts.size()));
}

}  // namespace

void ExteriorData::validate() const {
  if (!(t >= 0)) throw ParameterError("ExteriorData: t must be >= 0");
  if (!(d > 0)) throw ParameterError("ExteriorData: d must be positive");
  if (!(window > 2)) throw ParameterError("ExteriorData: window must contain [-1, 2]");
  for (const auto& term : phi.terms()) {
    if (term.kind == ShapeTerm::Kind::linear && (term.a != 0 || term.b != 0)) {
      throw ParameterError("ExteriorData: phi must be compactly supported");
    }
  }
  const auto sp = phi.support();
  if (sp.lo <= sp.hi) {
    if (sp.lo > -window && sp.hi < window && !(sp.hi <= -d || sp.lo >= 1 + d)) {
      // A single hull may straddle the slab when phi has bumps on both sides.
      for (const auto& term : phi.terms()) {
        const Shape one({term});
        const auto s1 = one.support();
        if (s1.lo <= s1.hi && !(s1.hi <= -d || s1.lo >= 1 + d)) {
          throw ParameterError("ExteriorData: phi must vanish on (-d, 1+d)");
        }
      }
    }
    if (sp.lo <= -window || sp.hi >= window) throw ParameterError("ExteriorData: phi support must lie inside the window");
    if (phi.sampled_min() < 0) throw ParameterError("ExteriorData: phi must be nonnegative");
  }
  const auto sv = v.support();
  if (sv.lo <= sv.hi && (sv.lo <= -window || sv.hi >= window)) {
    throw ParameterError("ExteriorData: v must be linear outside the window");
  }
  for (const auto& term : v.terms()) {
    if (term.kind != ShapeTerm::Kind::linear && term.kind != ShapeTerm::Kind::zero) {
      const Shape one({term});
      const auto s1 = one.support();
      if (!(s1.hi <= 0 || s1.lo >= 1)) throw ParameterError("ExteriorData: v bumps must lie outside (0,1)");
    }
  }
}

Grid slab_grid(Index n, double ratio) {
  if (ratio >= 1) return make_graded_grid({0, 1}, n, Grading::uniform());
  return make_graded_grid({0, 1}, n, Grading::geometric(ratio, Cluster::both));
}

// --- assembly ------------------------------------------------------------------

DiscreteSystem::DiscreteSystem(SlabProblem problem)
    : problem_(std::move(problem)),
      kernel_(problem_.params),
      rules_(-problem_.params.s, problem_.quad.n_near, problem_.quad.n_mid, problem_.quad.panel_ratio) {
  const Grid& g = problem_.interior_grid;
  if (g.size() < 4) throw AssemblyError("assemble: interior grid needs at least 4 nodes");
  if (g.nodes(0) != 0 || g.nodes(g.size() - 1) != 1) throw AssemblyError("assemble: interior grid must span [0,1]");
  for (Index i = 0; i + 1 < g.size(); ++i) {
    if (!(g.nodes(i + 1) > g.nodes(i))) throw AssemblyError("assemble: interior grid must increase strictly");
  }
  problem_.quad.validate();
  const ExteriorData& ext = problem_.exterior;
  ext.validate();

  const double R = ext.window;
  const double g0 = problem_.mesh.first_gap > 0 ? problem_.mesh.first_gap : g.min_gap();
  auto knots = ext.v.knots();
  const auto pk = ext.phi.knots();
  knots.insert(knots.end(), pk.begin(), pk.end());
  std::vector<double> left_knots, right_knots;
  for (double k : knots) {
    if (k < 0) left_knots.push_back(-k);
    if (k > 1) right_knots.push_back(k - 1);
  }
  const Vec lo = exterior_nodes(g0, problem_.mesh, R, left_knots);
  const Vec hi = exterior_nodes(g0, problem_.mesh, R - 1, right_knots);
  const Vec left_x = -lo.reverse();
  const Vec right_x = hi.array() + 1;

  auto fn = [ext](double y) { return ext.value(y); };
  auto dfn = [ext](double y) { return ext.slope(y); };
  left_ = Piece::function(left_x, fn, dfn);
  right_ = Piece::function(right_x, fn, dfn);
  left_model_ = ExteriorModel::linear(ext.slope(-R), ext.value(-R) + ext.slope(-R) * R);
  right_model_ = ExteriorModel::linear(ext.slope(R), ext.value(R) - ext.slope(R) * R);

  // Node values: unknowns inside, linear extrapolation from the two nearest
  // unknowns at the walls. Slopes: three-point stencils of the node values.
  const Index n = g.size();
  const Vec& x = g.nodes;
  value_dep_.assign(n, {});
  slope_dep_.assign(n, {});
  {
    const double r = (x(1) - x(0)) / (x(2) - x(1));
    value_dep_[0].add(0, 1 + r);
    value_dep_[0].add(1, -r);
    const double q = (x(n - 1) - x(n - 2)) / (x(n - 2) - x(n - 3));
    value_dep_[n - 1].add(n - 3, 1 + q);
    value_dep_[n - 1].add(n - 4, -q);
  }
  for (Index k = 1; k + 1 < n; ++k) value_dep_[k].add(k - 1, 1);
  for (Index k = 0; k < n; ++k) {
    for (const auto& [node, w] : slope_weights(x, k)) {
      for (const auto& [j, c] : value_dep_[node].terms) slope_dep_[k].add(j, w * c);
    }
  }
}

DiscreteSystem assemble(const SlabProblem& problem) { return DiscreteSystem(problem); }

Vec DiscreteSystem::node_values(const Vec& u) const {
  if (u.size() != unknowns()) throw ParameterError("DiscreteSystem: wrong number of unknowns");
  const Index n = grid().size();
  Vec v(n);
  for (Index k = 0; k < n; ++k) {
    double acc = 0;
    for (const auto& [j, c] : value_dep_[k].terms) acc += c * u(j);
    v(k) = acc;
  }
  return v;
}

GraphProfile DiscreteSystem::profile(const Vec& u) const {
  Piece mid = Piece::interpolating(grid().nodes, node_values(u));
  return GraphProfile({left_, std::move(mid), right_}, left_model_, right_model_);
}

Vec DiscreteSystem::initial_guess() const {
  const double a = problem_.exterior.value(0), b = problem_.exterior.value(1);
  return (a + (b - a) * unknown_nodes().array()).matrix();
}

double DiscreteSystem::row(const GraphProfile& g, Index i, const Vec& u, Eigen::Ref<Eigen::RowVectorXd> jrow,
                           bool want_jac, bool) const {
  const double s = problem_.params.s;
  const Index k = i + 1;
  const Vec& x = grid().nodes;
  const GraphSampler smp(g, {x(k), u(i)});
  const double t_near = problem_.quad.r_pair * smp.local_gap();
  const Piece& P = g.pieces()[kInteriorPiece];
  double near = 0, mid = 0;

  auto add_grad = [&](const GraphSampler::Sample& sm, double t, double coef) {
    // coef = d(term)/dq; accumulate dq/du_j.
    const Index a = sm.seg, b = sm.seg + 1;
    const double H = x(b) - x(a);
    std::array<double, 4> gq;
    if (sm.adjacent) {
      const auto gr = smp.adjacent(sm.side).e.gradient(sm.side * t);
      for (int m = 0; m < 4; ++m) gq[m] = sm.side * gr[m];
    } else {
      const auto hb = HermiteBasis::at(sm.tau);
      gq = {hb.h00 / t, H * hb.h10 / t, hb.h01 / t, H * hb.h11 / t};
      jrow(i) -= coef / t;
    }
    for (const auto& [j, c] : value_dep_[a].terms) jrow(j) += coef * gq[0] * c;
    for (const auto& [j, c] : slope_dep_[a].terms) jrow(j) += coef * gq[1] * c;
    for (const auto& [j, c] : value_dep_[b].terms) jrow(j) += coef * gq[2] * c;
    for (const auto& [j, c] : slope_dep_[b].terms) jrow(j) += coef * gq[3] * c;
  };

  rules_.visit(smp.breaks(), t_near, [&](double t, double w, bool is_near) {
    const double tk = std::pow(t, -1 - s);
    double v = 0;
    for (int side : {+1, -1}) {
      const auto sm = smp.sample(side, t);
      if (!sm.inside) continue;
      if (sm.fill != Fill::finite) {
        v += (sm.fill == Fill::empty ? 2 : -2) * kernel_.f_inf() * tk;
        continue;
      }
      v += -2 * kernel_(sm.q) * tk;
      if (!want_jac) continue;
      const double coef = -2 * kernel_.derivative(sm.q) * tk * w;
      if (sm.piece == kInteriorPiece) {
        add_grad(sm, t, coef);
      } else {
        jrow(i) -= coef / t;
      }
    }
    (is_near ? near : mid) += w * v;
  });
  (void)P;
  double dl = 0, dr = 0;
  const double tail = side_tail(g.left(), smp.at(), smp.d_left(), -1, problem_.params, kernel_, problem_.quad,
                                want_jac ? &dl : nullptr) +
                      side_tail(g.right(), smp.at(), smp.d_right(), +1, problem_.params, kernel_, problem_.quad,
                                want_jac ? &dr : nullptr);
  if (want_jac) jrow(i) += dl + dr;
  return (near + mid) + tail;
}

Vec DiscreteSystem::residual(const Vec& u) const {
  const GraphProfile g = profile(u);
  Vec r(unknowns());
  Eigen::RowVectorXd dummy(unknowns());
  for (Index i = 0; i < unknowns(); ++i) r(i) = row(g, i, u, dummy, false, false);
  return r;
}

Vec DiscreteSystem::residual(const Vec& u, Mat& jac) const {
  const GraphProfile g = profile(u);
  const Index m = unknowns();
  Vec r(m);
  jac.setZero(m, m);
  Eigen::RowVectorXd jr(m);
  for (Index i = 0; i < m; ++i) {
    jr.setZero();
    r(i) = row(g, i, u, jr, true, false);
    jac.row(i) = jr;
  }
  return r;
}

Vec DiscreteSystem::jacobian_diagonal(const Vec& u) const {
  Mat j;
  residual(u, j);
  return j.diagonal();
}

// --- iteration -----------------------------------------------------------------

bool diagonally_dominant(const Mat& j, double slack) {
  for (Index i = 0; i < j.rows(); ++i) {
    const double d = j(i, i);
    const double off = j.row(i).sum() - d;
    if (!(d > 0) || d + off < -slack * d) return false;
  }
  return true;
}

namespace {

Vec picard_from(const Vec& u, const Vec& r, const Vec& diag, double damping) {
  Vec out = u - damping * r.cwiseQuotient(diag);
  if (!out.allFinite()) throw DivergenceError("picard_step: non-finite update", dump_vector(u));
  return out;
}

}  // namespace

Vec picard_step(const DiscreteSystem& sys, const Vec& u, double damping) {
  if (!(damping >= 0)) throw ParameterError("picard_step: damping must be >= 0");
  if (damping == 0) return u;
  Mat j;
  const Vec r = sys.residual(u, j);
  return picard_from(u, r, j.diagonal(), damping);
}

NewtonOutcome newton_step(const DiscreteSystem& sys, const Vec& u, double dominance_slack) {
  Mat j;
  const Vec r = sys.residual(u, j);
  NewtonOutcome out;
  if (diagonally_dominant(j, dominance_slack)) {
    Eigen::PartialPivLU<Mat> lu(j);
    const Vec du = lu.solve(-r);
    if (du.allFinite()) {
      // Merit: residual measured in displacement units, r_i / J_ii.
      const Vec scale = j.diagonal().cwiseInverse();
      const double m0 = r.cwiseProduct(scale).norm();
      double lambda = 1;
      for (int k = 0; k < 30; ++k, lambda /= 2) {
        const Vec trial = u + lambda * du;
        Vec rt;
        try {
          rt = sys.residual(trial);
        } catch (const DomainError&) {
          continue;  // trial left the representable range
        }
        if (rt.allFinite() && rt.cwiseProduct(scale).norm() < (1 - 1e-4 * lambda) * m0) {
          out.u = trial;
          out.used_newton = true;
          out.residual_inf = rt.lpNorm<Eigen::Infinity>();
          return out;
        }
      }
    }
  }
  out.u = picard_from(u, r, j.diagonal(), 0.5);
  out.residual_inf = sys.residual(out.u).lpNorm<Eigen::Infinity>();
  return out;
}

SolveReport solve(const DiscreteSystem& sys, Vec u, const SolveOptions& opts) {
  SolveReport rep;
  double r = sys.residual(u).lpNorm<Eigen::Infinity>();
  if (!std::isfinite(r)) throw DivergenceError("solve: non-finite initial residual", dump_vector(u));
  rep.history.push_back(r);
  int stalled = 0;
  for (int it = 0; it < opts.max_iter && r > opts.tol; ++it) {
    double rn;
    if (it < opts.picard_iters || !opts.use_newton) {
      u = picard_step(sys, u, opts.damping);
      rn = sys.residual(u).lpNorm<Eigen::Infinity>();
      rep.steps.push_back("picard");
    } else {
      auto st = newton_step(sys, u, opts.dominance_slack);
      u = std::move(st.u);
      rn = st.residual_inf;
      rep.steps.push_back(st.used_newton ? "newton" : "newton-fallback");
    }
    if (!std::isfinite(rn)) throw DivergenceError("solve: non-finite residual", dump_vector(u));
    rep.iterations = it + 1;
    rep.history.push_back(rn);
    stalled = rn > 0.9 * r ? stalled + 1 : 0;
    r = rn;
    if (stalled >= 8) break;
  }
  rep.residual_inf = r;
  rep.converged = r <= opts.tol;
  rep.u = u;
  rep.solution = sys.profile(u);
  return rep;
}

SolveReport solve(const SlabProblem& problem, const SolveOptions& opts) {
  const DiscreteSystem sys(problem);
  return solve(sys, sys.initial_guess(), opts);
}

}  // namespace stickygraph
