#include "stickygraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stickygraph/errors.hpp"

namespace stickygraph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct WallData {
  std::vector<double> d;  // distance to the wall, increasing, wall node excluded
  std::vector<double> u;
  double wall_x;
};

WallData wall_data(const GraphProfile& g, Side side) {
  const Piece& P = g.pieces()[interior_piece(g, side)];
  WallData w;
  const Index n = P.nodes();
  if (side == Side::left) {
    w.wall_x = P.x(0);
    for (Index k = 1; k < n; ++k) {
      w.d.push_back(P.x(k) - w.wall_x);
      w.u.push_back(P.u(k));
    }
  } else {
    w.wall_x = P.x(n - 1);
    for (Index k = n - 2; k >= 0; --k) {
      w.d.push_back(w.wall_x - P.x(k));
      w.u.push_back(P.u(k));
    }
  }
  return w;
}

struct Extrapolation {
  double limit;
  double exponent;
  bool power_law;
};

// y = L + c d^p through three points.
Extrapolation three_point(const double* d, const double* y) {
  const double a = y[1] - y[0], b = y[2] - y[1];
  if (a == 0 && b == 0) return {y[0], kNaN, false};
  if (!(a * b > 0)) return {y[0], kNaN, false};
  const double rho = b / a;
  auto g = [&](double p) {
    return (std::pow(d[2], p) - std::pow(d[1], p)) / (std::pow(d[1], p) - std::pow(d[0], p)) - rho;
  };
  double lo = 1e-3, hi = 8;
  if (g(lo) > 0 || g(hi) < 0) return {y[0], kNaN, false};
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    (g(m) > 0 ? hi : lo) = m;
  }
  const double p = 0.5 * (lo + hi);
  const double c = a / (std::pow(d[1], p) - std::pow(d[0], p));
  return {y[0] - c * std::pow(d[0], p), p, true};
}

double signed_offset(Side side, double d) { return side == Side::left ? d : -d; }

// Sample abscissae (nodes and segment midpoints) of all finite pieces in [lo, hi].
std::vector<double> sample_points(const GraphProfile& g, double lo, double hi) {
  std::vector<double> xs;
  for (const auto& P : g.pieces()) {
    if (P.fill != Fill::finite) continue;
    for (Index k = 0; k < P.nodes(); ++k) {
      if (P.x(k) > lo && P.x(k) < hi) xs.push_back(P.x(k));
      if (k + 1 < P.nodes()) {
        const double m = 0.5 * (P.x(k) + P.x(k + 1));
        if (m > lo && m < hi) xs.push_back(m);
      }
    }
  }
  return xs;
}

}  // namespace

Index interior_piece(const GraphProfile& g, Side side) {
  const auto& ps = g.pieces();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    if (ps[k].fill != Fill::finite) continue;
    if (side == Side::left && ps[k].lo() == 0) return Index(k);
    if (side == Side::right && ps[k].hi() == 1) return Index(k);
  }
  throw DomainError("analysis: no interior piece adjoining the wall");
}

double exterior_wall_value(const GraphProfile& g, Side side) {
  const auto& ps = g.pieces();
  for (const auto& P : ps) {
    if (side == Side::left && P.hi() == 0) return P.fill == Fill::finite ? P.value(0) : P.u(0);
    if (side == Side::right && P.lo() == 1) return P.fill == Fill::finite ? P.value(1) : P.u(0);
  }
  return side == Side::left ? g.left().value(0) : g.right().value(1);
}

StickinessReport boundary_limit(const GraphProfile& g, Side side, const BoundaryLimitOptions& opts) {
  const WallData w = wall_data(g, side);
  if (w.d.size() < 6) throw AccuracyError("boundary_limit: need at least 6 interior nodes near the wall");
  if (w.d[4] > 64 * w.d[0]) throw AccuracyError("boundary_limit: grid too coarse near the wall");
  const auto e1 = three_point(w.d.data(), w.u.data());
  const auto e2 = three_point(w.d.data() + 1, w.u.data() + 1);

  StickinessReport rep;
  rep.side = side;
  rep.interior_limit = e1.limit;
  rep.exterior_value = exterior_wall_value(g, side);
  rep.jump = rep.interior_limit - rep.exterior_value;
  rep.error_estimate = (e1.power_law && e2.power_law) ? std::abs(e1.limit - e2.limit) : std::abs(w.u[1] - w.u[0]);
  rep.threshold = opts.threshold_factor * rep.error_estimate + opts.threshold_floor;
  rep.verdict = std::abs(rep.jump) > rep.threshold ? StickinessReport::Verdict::sticky
                                                   : StickinessReport::Verdict::continuous;
  if (rep.verdict == StickinessReport::Verdict::sticky) {
    const double delta = w.d[2];
    const double half = rep.exterior_value + 0.5 * rep.jump;
    Rect r;
    r.x_lo = side == Side::left ? w.wall_x : w.wall_x - delta;
    r.x_hi = side == Side::left ? w.wall_x + delta : w.wall_x;
    r.y_lo = std::min(rep.exterior_value, half);
    r.y_hi = std::max(rep.exterior_value, half);
    r.fill = rep.jump > 0 ? Fill::full : Fill::empty;
    rep.clean_region = r;
  }
  return rep;
}

bool clean_region_holds(const GraphProfile& g, const StickinessReport& rep) {
  if (!rep.clean_region) return true;
  const Rect& r = *rep.clean_region;
  const WallData w = wall_data(g, rep.side);
  for (std::size_t k = 0; k < w.d.size(); ++k) {
    if (w.d[k] > r.x_hi - r.x_lo) break;
    // Full: the graph stays above the rectangle; empty: below it.
    if (r.fill == Fill::full ? !(w.u[k] > r.y_hi) : !(w.u[k] < r.y_lo)) return false;
  }
  return true;
}

ExponentFit fit_power_law(const std::vector<std::pair<double, double>>& pts, double noise_floor) {
  std::vector<std::pair<double, double>> used;
  for (const auto& [x, y] : pts) {
    if (x > 0 && std::abs(y) > noise_floor && std::isfinite(y)) used.emplace_back(x, std::abs(y));
  }
  if (used.size() < 5) throw DegenerateFitError("power-law fit: fewer than 5 usable points");
  const Index n = Index(used.size());
  Eigen::MatrixXd A(n, 2);
  Vec b(n);
  for (Index i = 0; i < n; ++i) {
    A(i, 0) = 1;
    A(i, 1) = std::log(used[i].first);
    b(i) = std::log(used[i].second);
  }
  const Vec c = A.colPivHouseholderQr().solve(b);
  const Vec res = b - A * c;
  const double mean = b.mean();
  const double sst = (b.array() - mean).square().sum();
  ExponentFit fit;
  fit.exponent = c(1);
  fit.coefficient = std::exp(c(0));
  fit.r_squared = sst > 0 ? std::clamp(1 - res.squaredNorm() / sst, 0.0, 1.0) : 1.0;
  fit.n_points = n;
  fit.window = {used.front().first, used.back().first};
  fit.points = used;
  return fit;
}

ExponentFit fit_boundary_exponent(const GraphProfile& g, double slope, Side side, const FitWindow& win) {
  const WallData w = wall_data(g, side);
  std::vector<double> tilted(w.d.size());
  for (std::size_t k = 0; k < w.d.size(); ++k) tilted[k] = w.u[k] - slope * signed_offset(side, w.d[k]);
  double u0 = exterior_wall_value(g, side);
  if (win.reference == FitWindow::Reference::interior_trace) {
    if (w.d.size() < 3) throw DegenerateFitError("exponent fit: fewer than 3 interior nodes");
    const auto e = three_point(w.d.data(), tilted.data());
    if (e.power_law) u0 = e.limit;
  }
  const double h = w.d.front();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < w.d.size(); ++k) {
    if (w.d[k] < win.lo * h * (1 - 1e-12) || w.d[k] > win.hi * h * (1 + 1e-12)) continue;
    pts.emplace_back(w.d[k], tilted[k] - u0);
  }
  auto fit = fit_power_law(pts, win.noise_floor);
  fit.window = {win.lo * h, win.hi * h};
  return fit;
}

ExponentFit invert_graph_near_sticky(const GraphProfile& g, Side side, const FitWindow& win) {
  const auto rep = boundary_limit(g, side);
  if (rep.verdict != StickinessReport::Verdict::sticky) throw InversionError("inversion: profile is not sticky");
  return invert_graph_near_sticky(g, side, rep.interior_limit, win);
}

ExponentFit invert_graph_near_sticky(const GraphProfile& g, Side side, double limit, const FitWindow& win) {
  const WallData w = wall_data(g, side);
  const double h = w.d.front();
  std::vector<std::pair<double, double>> pts;
  double prev = 0;
  int sign = 0;
  for (std::size_t k = 0; k < w.d.size(); ++k) {
    if (w.d[k] < win.lo * h * (1 - 1e-12) || w.d[k] > win.hi * h * (1 + 1e-12)) continue;
    const double dy = w.u[k] - limit;
    const int sg = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    if (sg == 0 || (sign != 0 && sg != sign) || std::abs(dy) <= prev) {
      throw InversionError("inversion: profile not strictly monotone in the detachment range");
    }
    sign = sg;
    prev = std::abs(dy);
    pts.emplace_back(std::abs(dy), w.d[k]);
  }
  auto fit = fit_power_law(pts, 0);
  fit.window = {win.lo * h, win.hi * h};
  return fit;
}

namespace {

template <typename MapX, typename MapU, typename MapD>
GraphProfile transform(const GraphProfile& g, MapX mx, MapU mu, MapD md,
                       std::function<double(double)> (*wrap)(const std::function<double(double)>&, double, double, double),
                       double a, double b, double c, ExteriorModel left, ExteriorModel right) {
  std::vector<Piece> out;
  for (const auto& P : g.pieces()) {
    Piece Q = P;
    Q.x = P.x.unaryExpr(mx);
    if (P.fill == Fill::finite) {
      for (Index k = 0; k < P.nodes(); ++k) {
        Q.u(k) = mu(P.x(k), P.u(k));
        Q.du(k) = md(P.du(k));
      }
      if (P.fn) Q.fn = wrap(P.fn, a, b, c);
    }
    out.push_back(std::move(Q));
  }
  return GraphProfile(std::move(out), std::move(left), std::move(right));
}

ExteriorModel map_model(const ExteriorModel& m, const std::function<ExteriorModel(const ExteriorModel&)>& f) {
  return f(m);
}

}  // namespace

GraphProfile blowup_rescale(const GraphProfile& g, double k) {
  if (!(k > 0)) throw ParameterError("blowup_rescale: k must be positive");
  if (k == 1) return g;
  auto model = [k](const ExteriorModel& m) {
    switch (m.kind) {
      case ExteriorModel::Kind::linear:
        return ExteriorModel::linear(m.slope, k * m.offset);
      case ExteriorModel::Kind::sampled: {
        auto f = m.extension;
        return ExteriorModel::sampled([f, k](double y) { return k * f(y / k); });
      }
      default:
        return m;
    }
  };
  auto wrap = [](const std::function<double(double)>& f, double kk, double, double) -> std::function<double(double)> {
    return [f, kk](double y) { return kk * f(y / kk); };
  };
  return transform(
      g, [k](double x) { return k * x; }, [k](double, double u) { return k * u; }, [](double d) { return d; },
      +wrap, k, 0, 0, map_model(g.left(), model), map_model(g.right(), model));
}

GraphProfile vertical_rescale(const GraphProfile& g, double slope, double eps) {
  if (!(eps > 0)) throw ParameterError("vertical_rescale: eps must be positive");
  auto model = [slope, eps](const ExteriorModel& m) {
    switch (m.kind) {
      case ExteriorModel::Kind::linear:
        return ExteriorModel::linear((m.slope - slope) / eps, m.offset / eps);
      case ExteriorModel::Kind::sampled: {
        auto f = m.extension;
        return ExteriorModel::sampled([f, slope, eps](double y) { return (f(y) - slope * y) / eps; });
      }
      default:
        return m;
    }
  };
  auto wrap = [](const std::function<double(double)>& f, double l, double e, double) -> std::function<double(double)> {
    return [f, l, e](double y) { return (f(y) - l * y) / e; };
  };
  return transform(
      g, [](double x) { return x; }, [slope, eps](double x, double u) { return (u - slope * x) / eps; },
      [slope, eps](double d) { return (d - slope) / eps; }, +wrap, slope, eps, 0, map_model(g.left(), model),
      map_model(g.right(), model));
}

std::vector<LevelValue> flatness_profile(const GraphProfile& g, double slope, Side side, int levels) {
  const Piece& P = g.pieces()[interior_piece(g, side)];
  const double wall = side == Side::left ? P.lo() : P.hi();
  const double u0 = exterior_wall_value(g, side);
  std::vector<LevelValue> out;
  double prev = kNaN;
  for (int j = 0; j <= levels; ++j) {
    const double r = std::ldexp(1.0, -j);
    const double lo = side == Side::left ? wall : wall - r, hi = side == Side::left ? wall + r : wall;
    double sup = 0;
    auto xs = sample_points(g, lo, hi);
    xs.push_back(side == Side::left ? hi : lo);
    for (double x : xs) {
      if (x < P.lo() || x > P.hi()) continue;
      sup = std::max(sup, std::abs(g.value(x) - u0 - slope * (x - wall)));
    }
    out.push_back({r, sup, j == 0 ? kNaN : sup / prev});
    prev = sup;
  }
  return out;
}

std::vector<LevelValue> oscillation_decay(const GraphProfile& g, double slope, double eta, int levels) {
  if (!(eta > 0 && eta < 1)) throw ParameterError("oscillation_decay: eta must lie in (0,1)");
  const double u0 = exterior_wall_value(g, Side::left);
  std::vector<LevelValue> out;
  double prev = kNaN;
  for (int m = 1; m <= levels; ++m) {
    const double r = std::pow(eta, m);
    double sup = 0;
    auto xs = sample_points(g, -r, r);
    xs.push_back(-r);
    xs.push_back(r);
    for (double x : xs) {
      const double v = g.value(x);
      if (std::isfinite(v)) sup = std::max(sup, std::abs(v - u0 - slope * x));
    }
    out.push_back({r, sup, m == 1 ? kNaN : sup / prev});
    prev = sup;
  }
  return out;
}

}  // namespace stickygraph
