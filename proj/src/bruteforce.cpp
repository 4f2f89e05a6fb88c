// Direct 2D evaluation of the nonlocal curvature, used as an oracle.
//
// Along each ray from the point the integrand is +-|y-x|^{-2-s} times an
// indicator, so the radial integral is a sum of closed-form pieces between
// boundary crossings. Subtracting the tangent halfplane T (whose own PV
// integral vanishes) leaves 2 (chi_T - chi_E) rho^{-1-s}, which is nonzero
// only in thin cusps along the tangent directions. Radii below rho0 are
// skipped; the resulting O(rho0^{1-s}) error is removed by one Richardson step.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "stickygraph/curvature.hpp"
#include "stickygraph/errors.hpp"

namespace stickygraph {

namespace {

constexpr double kPi = std::numbers::pi;

struct Frame {
  double theta_t;  // tangent direction
  double nx, ny;   // unit normal pointing into E
};

double crossing(const Indicator& in, Point x, double ex, double ey, double a, double b, bool state_a) {
  for (int it = 0; it < 200 && b - a > 1e-14 * b; ++it) {
    const double m = 0.5 * (a + b);
    if (in(x.x1 + m * ex, x.x2 + m * ey) == state_a) a = m; else b = m;
  }
  return 0.5 * (a + b);
}

// 2 int_{rho0}^inf (chi_T - chi_E) rho^{-1-s} drho along direction theta.
double ray_integral(const Indicator& in, Point x, const Frame& f, double theta, double s, double rho0,
                    const RadialPanels& rp) {
  const double ex = std::cos(theta), ey = std::sin(theta);
  const bool in_t = ex * f.nx + ey * f.ny > 0;
  auto piece = [&](double a, double b, bool in_e) {
    if (in_e == in_t) return 0.0;
    const double span = (std::pow(a, -s) - (std::isinf(b) ? 0.0 : std::pow(b, -s))) / s;
    return in_t ? 2 * span : -2 * span;
  };
  double rho = rho0;
  bool state = in(x.x1 + rho * ex, x.x2 + rho * ey);
  double start = rho, acc = 0;
  while (rho < rp.r_max) {
    const double next = rho * rp.growth;
    const bool st = in(x.x1 + next * ex, x.x2 + next * ey);
    if (st != state) {
      const double c = crossing(in, x, ex, ey, rho, next, state);
      acc += piece(start, c, state);
      start = c;
      state = st;
    }
    rho = next;
  }
  return acc + piece(start, std::numeric_limits<double>::infinity(), state);
}

Frame make_frame(const Indicator& in, Point x, const RadialPanels& rp) {
  const double r = 10 * rp.rho0;
  double theta_t;
  if (rp.tangent_angle) {
    theta_t = *rp.tangent_angle;
  } else {
    constexpr int kN = 720;
    std::vector<double> cuts;
    // Offset so that no probe lands on an axis-aligned boundary.
    constexpr double kShift = 0.37;
    bool prev = in(x.x1 + r * std::cos(2 * kPi * kShift / kN), x.x2 + r * std::sin(2 * kPi * kShift / kN));
    for (int k = 1; k <= kN; ++k) {
      const double th = 2 * kPi * (k + kShift) / kN;
      const bool st = in(x.x1 + r * std::cos(th), x.x2 + r * std::sin(th));
      if (st != prev) {
        double a = 2 * kPi * (k - 1 + kShift) / kN, b = th;
        for (int it = 0; it < 60; ++it) {
          const double m = 0.5 * (a + b);
          if (in(x.x1 + r * std::cos(m), x.x2 + r * std::sin(m)) == prev) a = m; else b = m;
        }
        cuts.push_back(0.5 * (a + b));
        prev = st;
      }
    }
    if (cuts.size() != 2) throw SingularPointError("nmc_bruteforce2d: no tangent line; supply tangent_angle");
    const double gap = cuts[1] - cuts[0];
    if (std::abs(gap - kPi) > 0.05) throw SingularPointError("nmc_bruteforce2d: kink at the point; supply tangent_angle");
    theta_t = 0.5 * (cuts[0] + cuts[1] - kPi);
  }
  Frame f{theta_t, -std::sin(theta_t), std::cos(theta_t)};
  const bool up = in(x.x1 + r * f.nx, x.x2 + r * f.ny);
  const bool down = in(x.x1 - r * f.nx, x.x2 - r * f.ny);
  if (up == down) throw SingularPointError("nmc_bruteforce2d: point is not on a boundary curve");
  if (!up) {
    f.nx = -f.nx;
    f.ny = -f.ny;
  }
  return f;
}

double angular_integral(const Indicator& in, Point x, const Frame& f, double s, double rho0, const RadialPanels& rp) {
  // On each half turn between tangent directions, cluster nodes toward both
  // ends where the ray integrand grows like |theta - theta_t|^{-s}.
  const double p = 2 / (1 - s);
  auto half = [&](double base) {
    auto g = [&](double v) {
      const double a = std::pow(v, p), b = std::pow(1 - v, p);
      const double frac = a / (a + b);
      const double dfrac = p * (std::pow(v, p - 1) * b + a * std::pow(1 - v, p - 1)) / ((a + b) * (a + b));
      return ray_integral(in, x, f, base + kPi * frac, s, rho0, rp) * kPi * dfrac;
    };
    double err = 0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, 0.0, 1.0, rp.max_depth, rp.theta_tol,
                                                                        &err);
  };
  return half(f.theta_t) + half(f.theta_t + kPi);
}

}  // namespace

double nmc_bruteforce2d(const Indicator& inside, Point at, const FracParams& p, const RadialPanels& annuli) {
  if (!(annuli.rho0 > 0 && annuli.growth > 1 && annuli.r_max > annuli.rho0)) {
    throw ParameterError("nmc_bruteforce2d: need rho0 > 0, growth > 1, r_max > rho0");
  }
  const Frame f = make_frame(inside, at, annuli);
  const double s = p.s;
  const double h1 = angular_integral(inside, at, f, s, annuli.rho0, annuli);
  const double h2 = angular_integral(inside, at, f, s, annuli.rho0 / 2, annuli);
  const double g = std::pow(2.0, 1 - s);
  return (g * h2 - h1) / (g - 1);
}

}  // namespace stickygraph
