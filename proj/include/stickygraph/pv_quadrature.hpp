#pragma once

// Quadrature for paired principal-value integrals
//
//   int_0^T [ g(+t) + g(-t) ] dt,
//
// whose paired integrand behaves like t^gamma (gamma > -1) at the origin.
// The first panel (0, t_near) uses a Gauss-Jacobi rule with weight t^gamma;
// the remaining panels run between caller-supplied break points (distances
// from the evaluation point to every grid node on either side), each split
// geometrically so that no panel spans a ratio larger than `max_ratio`.

#include <algorithm>
#include <cmath>
#include <vector>

#include "stickygraph/gauss.hpp"

namespace stickygraph {

class PairedQuadrature {
 public:
  PairedQuadrature(double gamma, int n_near, int n_mid, double max_ratio = 1.5)
      : gamma_(gamma), ratio_(max_ratio), near_(left_power_rule<double>(n_near, gamma)), mid_(unit_legendre<double>(n_mid)) {}

  double gamma() const { return gamma_; }

  /// Calls fn(t, w, near) for every node; w is the plain weight, i.e.
  /// sum w f(t) approximates int f dt with f ~ t^gamma on the first panel.
  /// `breaks` must be sorted ascending; entries <= t_near are ignored and the
  /// last entry closes the range.
  template <typename Fn>
  void visit(const std::vector<double>& breaks, double t_near, Fn&& fn) const {
    for (Eigen::Index k = 0; k < near_.size(); ++k) {
      const double xi = near_.nodes(k);
      fn(t_near * xi, t_near * near_.weights(k) / std::pow(xi, gamma_), true);
    }
    double a = t_near;
    for (double b : breaks) {
      if (b <= a * (1 + 1e-13)) continue;
      panel(a, b, fn);
      a = b;
    }
  }

  /// Gauss-Legendre over [a,b], split geometrically when b/a > max ratio.
  template <typename Fn>
  void panel(double a, double b, Fn&& fn) const {
    const int m = std::max(1, int(std::ceil(std::log(b / a) / std::log(ratio_) - 1e-9)));
    const double q = std::pow(b / a, 1.0 / m);
    double lo = a;
    for (int j = 0; j < m; ++j) {
      const double hi = j + 1 == m ? b : lo * q;
      const double len = hi - lo;
      for (Eigen::Index k = 0; k < mid_.size(); ++k) fn(lo + len * mid_.nodes(k), len * mid_.weights(k), false);
      lo = hi;
    }
  }

 private:
  double gamma_;
  double ratio_;
  QuadratureRule<double> near_;
  QuadratureRule<double> mid_;
};

/// Sorted, de-duplicated copy of positive distances.
inline std::vector<double> sorted_breaks(std::vector<double> d, double rel_tol = 1e-13) {
  std::sort(d.begin(), d.end());
  std::vector<double> out;
  out.reserve(d.size());
  for (double v : d) {
    if (!(v > 0)) continue;
    if (!out.empty() && v <= out.back() * (1 + rel_tol)) continue;
    out.push_back(v);
  }
  return out;
}

}  // namespace stickygraph
