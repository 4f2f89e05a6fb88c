#include "stickygraph/linear_frac.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "stickygraph/errors.hpp"
#include "stickygraph/gauss.hpp"
#include "stickygraph/profile.hpp"
#include "stickygraph/pv_quadrature.hpp"

namespace stickygraph {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

void check_sigma(double sigma) {
  if (!(sigma > 0.5 && sigma < 1)) throw ParameterError("sigma must lie in (1/2, 1)");
}

void check_grid(const Grid& g) {
  if (g.size() < 4) throw ParameterError("linear_frac: grid needs at least 4 nodes");
  for (Index k = 1; k < g.size(); ++k) {
    if (!(g.nodes(k) > g.nodes(k - 1))) throw ParameterError("linear_frac: grid nodes must increase");
  }
}

// Linear continuation of g beyond distance T from x on one side, fitted at
// distances T/2 and T. Throws when the data grow too fast to be summable.
struct Continuation {
  double at_T;
  double slope;  // per unit distance from x
};

Continuation continue_linearly(const ExteriorFunction& g, double x, double T, int side, double sigma) {
  const double g1 = g.value(x + side * T), g0 = g.value(x + side * T / 2);
  if (!std::isfinite(g1) || !std::isfinite(g0)) throw IllPosedDataError("exterior data not finite at the truncation radius");
  if (std::abs(g1) > 1 && std::abs(g0) > 0) {
    const double growth = std::log2(std::abs(g1) / std::abs(g0));
    if (growth >= 2 * sigma) {
      throw IllPosedDataError("exterior data grow like |y|^" + std::to_string(growth) + ", need exponent < 2 sigma = " +
                              std::to_string(2 * sigma));
    }
  }
  return {g1, (g1 - g0) / (T / 2)};
}

// T^-p / p * int_0^1 rho(T w^(-1/p)) dw, i.e. int_T^inf rho(t) t^(-1-p) dt.
template <typename Rho>
double power_tail(double T, double p, const QuadratureRule<double>& gl, Rho&& rho) {
  double acc = 0;
  for (Index k = 0; k < gl.size(); ++k) acc += gl.weights(k) * rho(T * std::pow(gl.nodes(k), -1 / p));
  return std::pow(T, -p) / p * acc;
}

std::vector<std::array<std::pair<Index, double>, 3>> all_slope_weights(const Vec& x) {
  std::vector<std::array<std::pair<Index, double>, 3>> sw(x.size());
  for (Index k = 0; k < x.size(); ++k) sw[k] = slope_weights(x, k);
  return sw;
}

}  // namespace

void LinearProfile::validate() const {
  check_sigma(sigma);
  check_grid(grid);
  if (values.size() != grid.size()) throw ParameterError("LinearProfile: values do not match the grid");
  if (!values.allFinite()) throw ParameterError("LinearProfile: values must be finite");
}

double LinearProfile::value(double x) const { return Piece::interpolating(grid.nodes, values).value(x); }

ExteriorFunction ExteriorFunction::zero() { return {[](double) { return 0.0; }, {}}; }

ExteriorFunction ExteriorFunction::constant(double c) {
  return {[c](double) { return c; }, {}};
}

double frac_laplacian_constant(double sigma) {
  using boost::math::tgamma;
  return std::pow(4.0, sigma) * tgamma(0.5 + sigma) / (std::sqrt(kPi) * std::abs(tgamma(-sigma)));
}

LinearProfile poisson_extension(const ExteriorFunction& g, double sigma, const Grid& grid, const LinearQuad& q,
                                double* remainder) {
  check_sigma(sigma);
  check_grid(grid);
  if (!(q.truncation > 2 * grid.domain.length())) throw ParameterError("poisson_extension: truncation too small");
  const double a = grid.domain.lo, b = grid.domain.hi, L = b - a, T = q.truncation;
  const double c = std::sin(kPi * sigma) / kPi;
  const PairedQuadrature rule(-sigma, q.n_near, q.n_mid, q.panel_ratio);
  const auto gl = unit_legendre<double>(16);

  const Index n = grid.size();
  LinearProfile out{grid, Vec(n), sigma};
  out.values(0) = g.value(a);
  out.values(n - 1) = g.value(b);
  double worst_tail = 0;

  for (Index i = 1; i + 1 < n; ++i) {
    const double x = grid.nodes(i);
    const double P = std::pow((x - a) * (b - x), sigma);
    double total = 0;
    for (int side : {-1, +1}) {
      // t = distance from the wall on this side; y = wall + side * t.
      const double wall = side < 0 ? a : b;
      const double delta = side < 0 ? x - a : b - x;
      auto kernel = [&](double t) { return c * P * std::pow(t * (t + L), -sigma) / (delta + t); };
      std::vector<double> br{delta, L, T};
      for (double k : g.knots) {
        const double d = side * (k - wall);
        if (d > 0 && d < T) br.push_back(d);
      }
      br = sorted_breaks(br);
      while (!br.empty() && br.back() > T) br.pop_back();
      double part = 0;
      rule.visit(br, 0.5 * std::min(delta, L), [&](double t, double w, bool) {
        part += w * kernel(t) * g.value(wall + side * t);
      });
      // Linear continuation beyond T, measured from the wall.
      const auto cont = continue_linearly(g, wall, T, side, sigma);
      auto rho = [&](double t) { return kernel(t) * std::pow(t, 1 + 2 * sigma); };
      const double i0 = power_tail(T, 2 * sigma, gl, rho);
      const double i1 = power_tail(T, 2 * sigma - 1, gl, rho);
      const double tail = (cont.at_T - cont.slope * T) * i0 + cont.slope * i1;
      worst_tail = std::max(worst_tail, std::abs(tail));
      total += part + tail;
    }
    out.values(i) = total;
  }
  if (remainder) *remainder = worst_tail;
  return out;
}

FracLaplacianRows frac_laplacian_rows(const Grid& grid, const ExteriorFunction& ext, double sigma,
                                      const LinearQuad& q) {
  check_sigma(sigma);
  check_grid(grid);
  const double a = grid.domain.lo, b = grid.domain.hi, T = q.truncation;
  if (!(T > 2 * grid.domain.length())) throw ParameterError("frac_laplacian_rows: truncation too small");
  const Vec& x = grid.nodes;
  const Index n = grid.size();
  const auto sw = all_slope_weights(x);
  const PairedQuadrature rule(1 - 2 * sigma, q.n_near, q.n_mid, q.panel_ratio);
  const double C = frac_laplacian_constant(sigma);

  FracLaplacianRows out{Eigen::MatrixXd::Zero(n - 2, n), Vec::Zero(n - 2)};

  for (Index i = 1; i + 1 < n; ++i) {
    auto row = out.M.row(i - 1);
    double ext_acc = 0;
    const double xi = x(i);
    const double hL = xi - x(i - 1), hR = x(i + 1) - xi;
    const double t_adj = std::min(hL, hR);

    auto add_value = [&](double y, double coef) {
      if (y < a || y > b) {
        ext_acc += coef * ext.value(y);
        return;
      }
      const Index k = grid.locate(y);
      const double H = x(k + 1) - x(k);
      const auto hb = HermiteBasis::at((y - x(k)) / H);
      row(k) += coef * hb.h00;
      row(k + 1) += coef * hb.h01;
      for (const auto& [j, w] : sw[k]) row(j) += coef * H * hb.h10 * w;
      for (const auto& [j, w] : sw[k + 1]) row(j) += coef * H * hb.h11 * w;
    };

    std::vector<double> br;
    br.reserve(n + ext.knots.size() + 1);
    for (Index j = 0; j < n; ++j) br.push_back(std::abs(x(j) - xi));
    for (double k : ext.knots) br.push_back(std::abs(k - xi));
    br.push_back(T);
    br = sorted_breaks(br);
    while (!br.empty() && br.back() > T) br.pop_back();

    // Inside the two adjacent segments the second difference is a cubic in t:
    // D(t) = -t^2 (c2R + c2L) - t^3 (c3R - c3L), accumulated as moments.
    double m2 = 0, m3 = 0;
    rule.visit(br, q.r_pair * t_adj, [&](double t, double w, bool) {
      const double k = w * std::pow(t, -1 - 2 * sigma);
      if (t <= t_adj * (1 + 1e-12)) {
        m2 += k * t * t;
        m3 += k * t * t * t;
        return;
      }
      row(i) += 2 * k;
      add_value(xi + t, -k);
      add_value(xi - t, -k);
    });
    {
      // Coefficients of c2R + c2L and c3R - c3L in (u_{i-1}, u_i, u_{i+1}, d_{i-1}, d_i, d_{i+1}).
      const std::array<double, 6> A{3 / (hL * hL), -3 / (hR * hR) - 3 / (hL * hL), 3 / (hR * hR), 1 / hL,
                                    -2 / hR + 2 / hL, -1 / hR};
      const std::array<double, 6> B{-2 / (hL * hL * hL), 2 / (hR * hR * hR) + 2 / (hL * hL * hL),
                                    -2 / (hR * hR * hR), -1 / (hL * hL), 1 / (hR * hR) - 1 / (hL * hL),
                                    1 / (hR * hR)};
      for (int m = 0; m < 3; ++m) row(i - 1 + m) -= m2 * A[m] + m3 * B[m];
      for (int m = 0; m < 3; ++m) {
        const double coef = -(m2 * A[3 + m] + m3 * B[3 + m]);
        for (const auto& [j, w] : sw[i - 1 + m]) row(j) += coef * w;
      }
    }
    // Beyond T both sides are exterior and continued linearly.
    const auto cr = continue_linearly(ext, xi, T, +1, sigma);
    const auto cl = continue_linearly(ext, xi, T, -1, sigma);
    const double beta = cr.slope + cl.slope;
    const double alpha_ext = -(cr.at_T + cl.at_T - beta * T);
    const double i0 = std::pow(T, -2 * sigma) / (2 * sigma);
    const double i1 = std::pow(T, 1 - 2 * sigma) / (2 * sigma - 1);
    row(i) += 2 * i0;
    ext_acc += alpha_ext * i0 - beta * i1;

    row *= C;
    out.exterior(i - 1) = C * ext_acc;
  }
  return out;
}

Vec frac_laplacian_apply(const LinearProfile& f, const ExteriorFunction& ext, const LinearQuad& q) {
  f.validate();
  const auto rows = frac_laplacian_rows(f.grid, ext, f.sigma, q);
  return rows.M * f.values + rows.exterior;
}

LinearProfile dirichlet_solve(const Vec& h_interior, double sigma, const Grid& grid, const LinearQuad& q) {
  const Index n = grid.size();
  if (h_interior.size() != n - 2) throw ParameterError("dirichlet_solve: source must have one value per interior node");
  if (!h_interior.allFinite()) throw ParameterError("dirichlet_solve: source must be finite");
  const auto rows = frac_laplacian_rows(grid, ExteriorFunction::zero(), sigma, q);
  const Eigen::MatrixXd A = rows.M.middleCols(1, n - 2);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw RefinementError("dirichlet_solve: discrete operator is singular; refine the grid");
  const Vec u = lu.solve(h_interior);
  const double res = (A * u - h_interior).norm();
  if (!u.allFinite() || res > 1e-8 * std::max(1.0, h_interior.norm())) {
    throw RefinementError("dirichlet_solve: linear solve residual " + std::to_string(res) + "; refine the grid");
  }
  LinearProfile out{grid, Vec::Zero(n), sigma};
  out.values.segment(1, n - 2) = u;
  return out;
}

LinearProfile dirichlet_solve(const std::function<double(double)>& h, double sigma, const Grid& grid,
                              const LinearQuad& q) {
  const Index n = grid.size();
  Vec hv(n - 2);
  for (Index i = 1; i + 1 < n; ++i) hv(i - 1) = h(grid.nodes(i));
  return dirichlet_solve(hv, sigma, grid, q);
}

}  // namespace stickygraph
