#include "stickygraph/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stickygraph/errors.hpp"

namespace stickygraph {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double fill_value(Fill f) { return f == Fill::empty ? -kInf : kInf; }
}  // namespace

double ExteriorModel::value(double y) const {
  switch (kind) {
    case Kind::linear:
      return slope * y + offset;
    case Kind::empty:
      return -kInf;
    case Kind::full:
      return kInf;
    case Kind::sampled:
      return extension(y);
  }
  return 0;
}

LocalExpansion LocalExpansion::of(double u0, double d0, double u1, double d1, double h, double tau) {
  const double du = (u0 - u1) / h;
  LocalExpansion e;
  e.c1 = (6 * tau * tau - 6 * tau) * du + (3 * tau * tau - 4 * tau + 1) * d0 + (3 * tau * tau - 2 * tau) * d1;
  e.c2 = ((12 * tau - 6) * du + (6 * tau - 4) * d0 + (6 * tau - 2) * d1) / (2 * h);
  e.c3 = (2 * du + d0 + d1) / (h * h);
  e.tau = tau;
  e.h = h;
  return e;
}

std::array<double, 4> LocalExpansion::gradient(double d) const {
  const double r = d / h;
  const double g_du = 6 * tau * tau - 6 * tau + r * (6 * tau - 3) + 2 * r * r;
  const double g_d0 = 3 * tau * tau - 4 * tau + 1 + r * (3 * tau - 2) + r * r;
  const double g_d1 = 3 * tau * tau - 2 * tau + r * (3 * tau - 1) + r * r;
  return {g_du / h, g_d0, -g_du / h, g_d1};
}

Piece Piece::hermite(Vec x, Vec u, Vec du) {
  if (x.size() < 2 || u.size() != x.size() || du.size() != x.size()) {
    throw ParameterError("Piece::hermite: need >= 2 nodes with matching values and slopes");
  }
  Piece p;
  p.x = std::move(x);
  p.u = std::move(u);
  p.du = std::move(du);
  return p;
}

std::array<std::pair<Index, double>, 3> slope_weights(const Vec& x, Index k) {
  const Index n = x.size();
  if (n == 2) {
    const double h = x(1) - x(0);
    return {{{0, -1 / h}, {1, 1 / h}, {1, 0.0}}};
  }
  if (k > 0 && k + 1 < n) {
    const double hl = x(k) - x(k - 1), hr = x(k + 1) - x(k), s = hl + hr;
    return {{{k - 1, -hr / (hl * s)}, {k, (hr / hl - hl / hr) / s}, {k + 1, hl / (hr * s)}}};
  }
  // One-sided parabola through the end node and its two neighbours.
  const int dir = k == 0 ? 1 : -1;
  const Index a = k, b = k + dir, c = k + 2 * dir;
  const double h0 = x(b) - x(a), h1 = x(c) - x(b);
  // p'(x_a) for the parabola through (x_a, x_b, x_c).
  const double wa = -(2 * h0 + h1) / (h0 * (h0 + h1));
  const double wb = (h0 + h1) / (h0 * h1);
  const double wc = -h0 / (h1 * (h0 + h1));
  return {{{a, wa}, {b, wb}, {c, wc}}};
}

Piece Piece::interpolating(Vec x, Vec u) {
  const Index n = x.size();
  if (n < 2 || u.size() != n) throw ParameterError("Piece::interpolating: need >= 2 nodes");
  Vec d(n);
  for (Index k = 0; k < n; ++k) {
    double acc = 0;
    for (const auto& [j, w] : slope_weights(x, k)) acc += w * u(j);
    d(k) = acc;
  }
  return hermite(std::move(x), std::move(u), std::move(d));
}

Piece Piece::function(Vec x, std::function<double(double)> fn, std::function<double(double)> dfn) {
  if (x.size() < 2) throw ParameterError("Piece::function: need >= 2 nodes");
  Piece p;
  p.u.resize(x.size());
  p.du.resize(x.size());
  for (Index k = 0; k < x.size(); ++k) {
    p.u(k) = fn(x(k));
    p.du(k) = dfn ? dfn(x(k)) : std::numeric_limits<double>::quiet_NaN();
  }
  p.x = std::move(x);
  p.fn = std::move(fn);
  return p;
}

Piece Piece::filled(double lo, double hi, Fill f) {
  Piece p;
  p.x = Vec(2);
  p.x << lo, hi;
  p.fill = f;
  p.u = Vec::Constant(2, fill_value(f));
  p.du = Vec::Zero(2);
  return p;
}

Index Piece::segment(double y) const {
  auto it = std::upper_bound(x.data(), x.data() + x.size(), y);
  return std::clamp<Index>(Index(it - x.data()) - 1, 0, x.size() - 2);
}

double Piece::value_in(Index k, double y) const {
  if (fill != Fill::finite) return fill_value(fill);
  if (fn) return fn(y);
  const double h = x(k + 1) - x(k);
  const auto b = HermiteBasis::at((y - x(k)) / h);
  return b.h00 * u(k) + h * b.h10 * du(k) + b.h01 * u(k + 1) + h * b.h11 * du(k + 1);
}

double Piece::value(double y) const { return value_in(segment(y), y); }

GraphProfile::GraphProfile(std::vector<Piece> pieces, ExteriorModel left, ExteriorModel right)
    : pieces_(std::move(pieces)), left_(std::move(left)), right_(std::move(right)) {
  validate();
}

void GraphProfile::validate() const {
  if (pieces_.empty()) throw ParameterError("GraphProfile: no pieces");
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& p = pieces_[k];
    for (Index i = 0; i + 1 < p.nodes(); ++i) {
      if (!(p.x(i + 1) > p.x(i))) throw ParameterError("GraphProfile: piece nodes must increase strictly");
    }
    if (k + 1 < pieces_.size() && p.hi() != pieces_[k + 1].lo()) {
      throw ParameterError("GraphProfile: pieces must be contiguous");
    }
  }
  if (left_.kind == ExteriorModel::Kind::sampled && !left_.extension) {
    throw ParameterError("GraphProfile: sampled exterior needs an extension function");
  }
  if (right_.kind == ExteriorModel::Kind::sampled && !right_.extension) {
    throw ParameterError("GraphProfile: sampled exterior needs an extension function");
  }
}

Index GraphProfile::piece_at(double y) const {
  for (std::size_t k = 0; k + 1 < pieces_.size(); ++k) {
    if (y < pieces_[k].hi()) return Index(k);
  }
  return Index(pieces_.size()) - 1;
}

double GraphProfile::value(double y) const {
  const auto w = window();
  if (y < w.lo) return left_.value(y);
  if (y > w.hi) return right_.value(y);
  return pieces_[piece_at(y)].value(y);
}

Fill GraphProfile::fill_at(double y) const {
  const double v = value(y);
  if (v == -kInf) return Fill::empty;
  if (v == kInf) return Fill::full;
  return Fill::finite;
}

Grid GraphProfile::grid() const {
  std::vector<double> xs;
  for (const auto& p : pieces_) {
    for (Index i = 0; i < p.nodes(); ++i) {
      if (!xs.empty() && i == 0 && xs.back() == p.x(0)) continue;
      xs.push_back(p.x(i));
    }
  }
  Grid g;
  g.nodes = Eigen::Map<Vec>(xs.data(), Index(xs.size()));
  g.domain = window();
  return g;
}

Vec GraphProfile::values() const {
  std::vector<double> vs;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& p = pieces_[k];
    for (Index i = 0; i < p.nodes(); ++i) {
      if (i == 0 && k > 0) {
        vs.back() = p.u(0);
        continue;
      }
      vs.push_back(p.u(i));
    }
  }
  return Eigen::Map<Vec>(vs.data(), Index(vs.size()));
}

bool GraphProfile::is_singular(double y, double rel_tol) const {
  for (std::size_t k = 0; k + 1 < pieces_.size(); ++k) {
    const auto& a = pieces_[k];
    const auto& b = pieces_[k + 1];
    if (a.hi() != y) continue;
    if (a.fill != Fill::finite || b.fill != Fill::finite) return true;
    const double ua = a.u(a.nodes() - 1), ub = b.u(0);
    const double da = a.du(a.nodes() - 1), db = b.du(0);
    if (std::isnan(da) || std::isnan(db)) return true;
    const double scale = 1 + std::abs(ua) + std::abs(da);
    return std::abs(ua - ub) > rel_tol * scale || std::abs(da - db) > rel_tol * scale;
  }
  return false;
}

}  // namespace stickygraph
