#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "stickygraph/errors.hpp"

namespace stickygraph {

template <typename Scalar>
struct QuadratureRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  Eigen::Index size() const { return nodes.size(); }
};

namespace detail {

// P_n^{(a,b)}(z) and P_{n-1}^{(a,b)}(z) by the three-term recurrence.
template <typename Scalar>
void jacobi_pair(int n, Scalar a, Scalar b, Scalar z, Scalar& pn, Scalar& pn1) {
  Scalar p1 = (a - b + (2 + a + b) * z) / 2;
  Scalar p2 = 1;
  for (int j = 2; j <= n; ++j) {
    const Scalar p3 = p2;
    p2 = p1;
    const Scalar c = 2 * j + a + b;
    const Scalar a1 = 2 * j * (j + a + b) * (c - 2);
    const Scalar a2 = (c - 1) * (a * a - b * b);
    const Scalar a3 = (c - 2) * (c - 1) * c;
    const Scalar a4 = 2 * (j + a - 1) * (j + b - 1) * c;
    p1 = ((a2 + a3 * z) * p2 - a4 * p3) / a1;
  }
  pn = p1;
  pn1 = p2;
}

}  // namespace detail

/// Gauss-Jacobi rule on [-1,1] for the weight (1-x)^a (1+x)^b.
///
/// Initial nodes come from the Golub-Welsch eigenproblem; each node is then
/// polished by Newton on the recurrence, and the weights use the closed-form
/// derivative expression (accurate to a few ulps even for tiny weights).
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_jacobi(int n, Scalar a, Scalar b) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (n < 1) throw ParameterError("gauss_jacobi: need at least one node");
  if (!(a > -1 && b > -1)) throw ParameterError("gauss_jacobi: exponents must exceed -1");

  Mat jac = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const Scalar c = 2 * k + a + b;
    jac(k, k) = (k == 0) ? (b - a) / (a + b + 2) : (b * b - a * a) / (c * (c + 2));
    if (k + 1 < n) {
      const Scalar kk = k + 1;
      const Scalar cc = 2 * kk + a + b;
      const Scalar num = 4 * kk * (kk + a) * (kk + b) * (kk + a + b);
      const Scalar den = cc * cc * (cc + 1) * (cc - 1);
      jac(k, k + 1) = jac(k + 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(jac, Eigen::EigenvaluesOnly);
  Vec z = eig.eigenvalues();

  QuadratureRule<Scalar> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Scalar ab = a + b;
  for (int i = 0; i < n; ++i) {
    Scalar x = z(i), pn = 0, pn1 = 0, dp = 0;
    for (int it = 0; it < 8; ++it) {
      detail::jacobi_pair(n, a, b, x, pn, pn1);
      const Scalar t = 2 * n + ab;
      dp = (n * (a - b - t * x) * pn + 2 * (n + a) * (n + b) * pn1) / (t * (1 - x * x));
      const Scalar dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 4 * std::numeric_limits<Scalar>::epsilon()) break;
    }
    detail::jacobi_pair(n, a, b, x, pn, pn1);
    const Scalar t = 2 * n + ab;
    dp = (n * (a - b - t * x) * pn + 2 * (n + a) * (n + b) * pn1) / (t * (1 - x * x));
    rule.nodes(i) = x;
    rule.weights(i) = 1 / (dp * pn1);
  }
  // Relative weights from the formula above; the common factor is fixed by
  // the zeroth moment, which only involves Gamma functions of small arguments.
  const Scalar mu0 = std::pow(Scalar(2), ab + 1) * std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(ab + 2);
  rule.weights *= mu0 / rule.weights.sum();
  return rule;
}

template <typename Scalar = double>
QuadratureRule<Scalar> gauss_legendre(int n) {
  return gauss_jacobi<Scalar>(n, Scalar(0), Scalar(0));
}

/// Rule for integral_0^A t^g f(t) dt with A = 1; scale with scaled_left_power().
/// Nodes in (0,1); the weights include the factor t^g.
template <typename Scalar = double>
QuadratureRule<Scalar> left_power_rule(int n, Scalar g) {
  auto r = gauss_jacobi<Scalar>(n, Scalar(0), g);
  r.nodes = (r.nodes.array() + 1) / 2;
  r.weights *= std::pow(Scalar(0.5), 1 + g);
  return r;
}

/// Legendre rule mapped to [0,1].
template <typename Scalar = double>
QuadratureRule<Scalar> unit_legendre(int n) {
  auto r = gauss_legendre<Scalar>(n);
  r.nodes = (r.nodes.array() + 1) / 2;
  r.weights /= 2;
  return r;
}

}  // namespace stickygraph
