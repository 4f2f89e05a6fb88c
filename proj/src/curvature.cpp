#include "stickygraph/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stickygraph/errors.hpp"

namespace stickygraph {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double column_term(const GraphSampler::Sample& smp, double t, double s, const ColumnKernel<double>& K) {
  const double w = std::pow(t, -1 - s);
  switch (smp.fill) {
    case Fill::empty:
      return 2 * K.f_inf() * w;
    case Fill::full:
      return -2 * K.f_inf() * w;
    case Fill::finite:
      break;
  }
  return -2 * K(smp.q) * w;
}

// Slope of the profile at the sampler's point, for the local-slope variant.
double tangent_slope(const GraphSampler& g) {
  const auto& r = g.adjacent(+1);
  if (r.active) return r.e.c1;
  const auto& l = g.adjacent(-1);
  if (l.active) return l.e.c1;
  const double h = 1e-6 * std::max(1.0, std::abs(g.at().x1));
  return (g.profile().value(g.at().x1 + h) - g.profile().value(g.at().x1 - h)) / (2 * h);
}

}  // namespace

void CurvatureQuad::validate() const {
  if (!(r_pair > 0 && r_pair < 1)) throw ParameterError("CurvatureQuad: r_pair must lie in (0,1)");
  if (n_near < 8 || n_mid < 8) throw ParameterError("CurvatureQuad: node counts must be >= 8");
  if (!(R_tail > r_pair)) throw ParameterError("CurvatureQuad: R_tail must exceed r_pair");
  if (!(panel_ratio > 1)) throw ParameterError("CurvatureQuad: panel_ratio must exceed 1");
}

double column_weight(double u_col, Point x, double y1, const FracParams& p) {
  const double d = std::abs(y1 - x.x1);
  if (d == 0) throw DomainError("column_weight: column through the evaluation point");
  if (std::isnan(u_col)) throw DomainError("column_weight: NaN column value");
  const double r = std::isinf(u_col) ? u_col : (u_col - x.x2) / d;
  return -2 * cap_f(r, p) * std::pow(d, -1 - p.s);
}

// --- sampler -----------------------------------------------------------------

GraphSampler::GraphSampler(const GraphProfile& g, Point at) : g_(&g), at_(at) {
  const auto w = g.window();
  if (!(at.x1 > w.lo && at.x1 < w.hi)) throw DomainError("curvature: point must lie strictly inside the window");
  Index pi = g.piece_at(at.x1);
  const Piece* pc = &g.pieces()[pi];
  if (pc->fill != Fill::finite) throw DomainError("curvature: point lies in an empty/full column range");

  Index k = pc->segment(at.x1);
  const double h = pc->x(k + 1) - pc->x(k);
  double x1 = at.x1;
  int node = -1;  // node index within the piece when x1 sits on a node
  if (std::abs(x1 - pc->x(k)) <= 1e-12 * h) {
    node = int(k);
  } else if (std::abs(x1 - pc->x(k + 1)) <= 1e-12 * h) {
    node = int(k + 1);
  }
  if (node >= 0) x1 = pc->x(node);

  auto expansion = [&](Index piece, Index seg, double tau0) {
    const Piece& P = g.pieces()[piece];
    Adjacent a;
    if (P.fill != Fill::finite || P.exact()) return a;
    a.active = true;
    a.piece = piece;
    a.seg = seg;
    a.tau0 = tau0;
    a.e = LocalExpansion::of(P.u(seg), P.du(seg), P.u(seg + 1), P.du(seg + 1), P.x(seg + 1) - P.x(seg), tau0);
    return a;
  };

  if (node < 0) {
    const double tau0 = (x1 - pc->x(k)) / h;
    left_ = right_ = expansion(pi, k, tau0);
  } else {
    const bool first = node == 0, last = node == pc->nodes() - 1;
    if ((first && pi > 0) || (last && pi + 1 < Index(g.pieces().size()))) {
      if (g.is_singular(x1)) throw SingularPointError("curvature: jump or corner at the evaluation point");
    }
    if (first) {
      const Piece& L = g.pieces()[pi - 1];
      left_ = expansion(pi - 1, L.nodes() - 2, 1.0);
      right_ = expansion(pi, 0, 0.0);
    } else if (last) {
      const Piece& R = g.pieces()[pi + 1];
      left_ = expansion(pi, pc->nodes() - 2, 1.0);
      right_ = expansion(pi + 1, 0, 0.0);
      (void)R;
    } else {
      left_ = expansion(pi, node - 1, 1.0);
      right_ = expansion(pi, node, 0.0);
    }
  }

  const double u = g.value(x1);
  if (!(std::abs(u - at.x2) <= 1e-8 * (1 + std::abs(u)))) throw DomainError("curvature: point is not on the graph");
  at_ = {x1, at.x2};

  d_left_ = x1 - w.lo;
  d_right_ = w.hi - x1;
  std::vector<double> d;
  for (const auto& P : g.pieces()) {
    for (Index i = 0; i < P.nodes(); ++i) d.push_back(std::abs(P.x(i) - x1));
  }
  breaks_ = sorted_breaks(std::move(d));
  local_gap_ = breaks_.front();
}

GraphSampler::Sample GraphSampler::sample(int side, double t) const {
  Sample out;
  out.side = side;
  if (t > (side < 0 ? d_left_ : d_right_)) return out;
  out.inside = true;
  const double y = at_.x1 + side * t;
  const Adjacent& a = adjacent(side);
  if (a.active) {
    const Piece& P = g_->pieces()[a.piece];
    if (y >= P.x(a.seg) && y <= P.x(a.seg + 1)) {
      const double d = side * t;
      out.q = side * a.e.slope_at(d);
      out.piece = a.piece;
      out.seg = a.seg;
      out.tau = (y - P.x(a.seg)) / (P.x(a.seg + 1) - P.x(a.seg));
      out.adjacent = true;
      return out;
    }
  }
  const Index pi = g_->piece_at(y);
  const Piece& P = g_->pieces()[pi];
  out.piece = pi;
  out.fill = P.fill;
  if (P.fill != Fill::finite) return out;
  const Index k = P.segment(y);
  out.seg = k;
  out.tau = (y - P.x(k)) / (P.x(k + 1) - P.x(k));
  out.q = (P.value_in(k, y) - at_.x2) / t;
  return out;
}

// --- tails -------------------------------------------------------------------

double side_tail(const ExteriorModel& m, Point at, double d, int side, const FracParams& p,
                 const ColumnKernel<double>& K, const CurvatureQuad& q, double* dx2, double* err) {
  const double s = p.s;
  if (dx2) *dx2 = 0;
  if (err) *err = 0;
  switch (m.kind) {
    case ExteriorModel::Kind::empty:
      return 2 * K.f_inf() * std::pow(d, -s) / s;
    case ExteriorModel::Kind::full:
      return -2 * K.f_inf() * std::pow(d, -s) / s;
    case ExteriorModel::Kind::linear: {
      // q(t) = A + B/t; with w = (d/t)^s the integral becomes
      // (d^-s / s) int_0^1 -2 F(A + (B/d) w^{1/s}) dw.
      const double A = side * m.slope;
      const double B = (m.slope * at.x1 + m.offset - at.x2) / d;
      const double scale = std::pow(d, -s) / s;
      if (B == 0) return -2 * K(A) * scale;
      static const auto gl = unit_legendre<double>(10);
      double acc = 0, dacc = 0;
      double hi = 1;
      for (int k = 0; k < 40; ++k) {
        const double lo = hi / 2;
        for (Eigen::Index j = 0; j < gl.size(); ++j) {
          const double w = lo + (hi - lo) * gl.nodes(j);
          const double ww = (hi - lo) * gl.weights(j);
          const double wp = std::pow(w, 1 / s);
          const double r = A + B * wp;
          acc += ww * -2 * K(r);
          if (dx2) dacc += ww * 2 * K.derivative(r) * wp / d;
        }
        hi = lo;
      }
      acc += hi * -2 * K(A);
      if (dx2) *dx2 = dacc * scale;
      return acc * scale;
    }
    case ExteriorModel::Kind::sampled: {
      const double R = std::max(q.R_tail, 2 * d);
      const PairedQuadrature rules(-s, 8, q.n_mid, q.panel_ratio);
      double acc = 0, dacc = 0;
      rules.panel(d, R, [&](double t, double w, bool) {
        const double r = (m.extension(at.x1 + side * t) - at.x2) / t;
        const double tk = std::pow(t, -1 - s);
        acc += w * -2 * K(r) * tk;
        dacc += w * 2 * K.derivative(r) * tk / t;
      });
      // Linear continuation beyond R from the last two samples.
      const double y1 = at.x1 + side * R, y0 = at.x1 + side * R * 0.999;
      const double slope = (m.extension(y1) - m.extension(y0)) / (y1 - y0);
      const auto lin = ExteriorModel::linear(slope, m.extension(y1) - slope * y1);
      double dl = 0;
      acc += side_tail(lin, at, R, side, p, K, q, dx2 ? &dl : nullptr);
      if (dx2) *dx2 = dacc + dl;
      if (err) *err = 4 * K.f_inf() * std::pow(R, -s) / s;
      return acc;
    }
  }
  return 0;
}

double tail_contribution(const ExteriorModel& left, const ExteriorModel& right, Point at, double d_minus,
                         double d_plus, const FracParams& p, const CurvatureQuad& q) {
  if (!(d_minus > 0 && d_plus > 0)) throw DomainError("tail_contribution: radii must be positive");
  const ColumnKernel<double> K(p);
  return side_tail(left, at, d_minus, -1, p, K, q) + side_tail(right, at, d_plus, +1, p, K, q);
}

double tail_contribution(const ExteriorModel& m, Point at, double from_radius, const FracParams& p,
                         const CurvatureQuad& q) {
  return tail_contribution(m, m, at, from_radius, from_radius, p, q);
}

// --- principal value ----------------------------------------------------------

namespace {

struct Split {
  double near = 0, mid = 0, tail = 0, tail_err = 0;
};

Split evaluate(const GraphProfile& g, Point at, const FracParams& p, const CurvatureQuad& q,
               const ColumnKernel<double>& K, const PairedQuadrature& rules) {
  const GraphSampler smp(g, at);
  const double s = p.s;
  const double t_near = q.r_pair * smp.local_gap();
  const bool subtract = q.pv_model == PvModel::paired_local_slope;
  const double slope = subtract ? tangent_slope(smp) : 0;
  const double f_r = subtract ? K(slope) : 0, f_l = subtract ? K(-slope) : 0;
  Split out;
  rules.visit(smp.breaks(), t_near, [&](double t, double w, bool near) {
    const auto r = smp.sample(+1, t);
    const auto l = smp.sample(-1, t);
    double v = 0;
    if (subtract && r.inside && l.inside && r.fill == Fill::finite && l.fill == Fill::finite) {
      v = -2 * ((K(r.q) - f_r) + (K(l.q) - f_l)) * std::pow(t, -1 - s);
    } else {
      if (r.inside) v += column_term(r, t, s, K);
      if (l.inside) v += column_term(l, t, s, K);
    }
    (near ? out.near : out.mid) += w * v;
  });
  double el = 0, er = 0;
  out.tail = side_tail(g.left(), smp.at(), smp.d_left(), -1, p, K, q, nullptr, &el) +
             side_tail(g.right(), smp.at(), smp.d_right(), +1, p, K, q, nullptr, &er);
  out.tail_err = el + er;
  return out;
}

}  // namespace

double nmc_value(const GraphProfile& profile, Point at, const FracParams& p, const CurvatureQuad& q,
                 const ColumnKernel<double>& kernel, const PairedQuadrature& rules) {
  const auto sp = evaluate(profile, at, p, q, kernel, rules);
  return (sp.near + sp.mid) + sp.tail;
}

CurvatureReport nmc_graph(const GraphProfile& profile, Point at, const FracParams& p, const CurvatureQuad& q) {
  q.validate();
  const ColumnKernel<double> K(p);
  const PairedQuadrature rules(-p.s, q.n_near, q.n_mid, q.panel_ratio);
  const PairedQuadrature coarse(-p.s, q.n_near / 2, q.n_mid / 2, q.panel_ratio);
  const auto fine = evaluate(profile, at, p, q, K, rules);
  const auto rough = evaluate(profile, at, p, q, K, coarse);
  CurvatureReport rep;
  rep.near = fine.near;
  rep.mid = fine.mid;
  rep.tail = fine.tail;
  rep.value = (rep.near + rep.mid) + rep.tail;
  rep.est_quadrature_error = std::abs(rep.value - ((rough.near + rough.mid) + rough.tail)) + fine.tail_err;
  rep.quad = q;
  return rep;
}

}  // namespace stickygraph
