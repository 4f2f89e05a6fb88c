#pragma once

// Column profile of the planar fractional curvature kernel:
//
//   F(r) = int_0^r (1+tau^2)^{-(2+s)/2} dtau = int_0^{atan r} cos^s(theta) dtheta,
//
// which turns one vertical column of the 2D kernel |x-y|^{-2-s} into a
// closed-form weight. F is odd, increasing and saturates at +-F_inf.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "stickygraph/frac_params.hpp"
#include "stickygraph/gauss.hpp"

namespace stickygraph {

namespace detail {

template <typename Scalar>
void check_order(Scalar s) {
  if (!(s > 0 && s < 1)) throw ParameterError("fractional order s must lie in (0,1)");
}

// int_{R}^{inf} (1+tau^2)^{-(2+s)/2} dtau for R = 1/z >= 1, via tau = 1/w:
// z^{1+s} int_0^1 v^s (1+z^2 v^2)^{-(2+s)/2} dv, a smooth integrand against v^s.
template <typename Scalar>
Scalar cap_f_complement(Scalar z, Scalar s, const QuadratureRule<Scalar>& vs_rule) {
  const Scalar e = -(2 + s) / 2;
  Scalar acc = 0;
  for (Eigen::Index k = 0; k < vs_rule.size(); ++k) {
    const Scalar v = vs_rule.nodes(k);
    acc += vs_rule.weights(k) * std::pow(1 + z * z * v * v, e);
  }
  return std::pow(z, 1 + s) * acc;
}

template <typename Scalar>
Scalar cap_f_core(Scalar r, Scalar s) {
  static const QuadratureRule<Scalar> gl = unit_legendre<Scalar>(64);
  const Scalar top = std::atan(r);
  Scalar acc = 0;
  for (Eigen::Index k = 0; k < gl.size(); ++k) acc += gl.weights(k) * std::pow(std::cos(top * gl.nodes(k)), s);
  return top * acc;
}

}  // namespace detail

/// F_inf(s) = int_0^{pi/2} cos^s = lim_{r->inf} F(r).
template <typename Scalar = double>
Scalar cap_f_infinity(const FracParamsT<Scalar>& p) {
  const auto rule = left_power_rule<Scalar>(32, p.s);
  return detail::cap_f_core<Scalar>(Scalar(1), p.s) + detail::cap_f_complement<Scalar>(Scalar(1), p.s, rule);
}

/// Reference evaluation of F(r); r may be +-infinity.
///
/// For |r| <= 1 a fixed 64-node Gauss rule on [0, atan r] (cos^s is analytic
/// there). For |r| > 1 the complement int_{|r|}^inf is integrated against its
/// v^s endpoint factor with a Gauss-Jacobi rule, so F(+-inf) = +-F_inf.
template <typename Scalar = double>
Scalar cap_f(Scalar r, const FracParamsT<Scalar>& p) {
  detail::check_order(p.s);
  if (std::isnan(r)) throw DomainError("cap_f: NaN argument");
  const Scalar a = std::abs(r);
  if (a <= 1) return detail::cap_f_core<Scalar>(r, p.s);
  const auto rule = left_power_rule<Scalar>(32, p.s);
  const Scalar finf = detail::cap_f_core<Scalar>(Scalar(1), p.s) + detail::cap_f_complement<Scalar>(Scalar(1), p.s, rule);
  const Scalar tail = std::isinf(a) ? Scalar(0) : detail::cap_f_complement<Scalar>(1 / a, p.s, rule);
  return std::copysign(finf - tail, r);
}

template <typename Scalar = double>
Scalar cap_f_prime(Scalar r, const FracParamsT<Scalar>& p) {
  return std::pow(1 + r * r, -(2 + p.s) / 2);
}

/// Fast evaluator of F for one fixed s.
///
/// Chebyshev expansion of F on [-1,1] (poles at +-i, so 48 terms reach
/// rounding level) and of the complement factor h(q), q = 1/r^2 in [0,1],
/// with F(r) = sign(r) (F_inf - |r|^{-(1+s)} h(1/r^2)) for |r| > 1.
/// Used on every hot path; agrees with cap_f() to a few ulps.
template <typename Scalar = double>
class ColumnKernel {
 public:
  static constexpr int kInner = 48;
  static constexpr int kOuter = 32;

  explicit ColumnKernel(const FracParamsT<Scalar>& p) : s_(p.s) {
    detail::check_order(s_);
    const auto rule = left_power_rule<Scalar>(40, s_);
    f_inf_ = detail::cap_f_core<Scalar>(Scalar(1), s_) + detail::cap_f_complement<Scalar>(Scalar(1), s_, rule);

    constexpr int kSamples = 96;
    std::array<Scalar, kSamples> fi{}, fo{};
    for (int j = 0; j < kSamples; ++j) {
      const Scalar x = std::cos(std::numbers::pi_v<Scalar> * (j + Scalar(0.5)) / kSamples);
      fi[j] = detail::cap_f_core<Scalar>(x, s_);
      const Scalar q = (x + 1) / 2;
      fo[j] = h_direct(q, rule);
    }
    for (int k = 0; k < kInner; ++k) inner_[k] = dct(fi, k);
    for (int k = 0; k < kOuter; ++k) outer_[k] = dct(fo, k);
  }

  Scalar s() const { return s_; }
  Scalar f_inf() const { return f_inf_; }

  Scalar operator()(Scalar r) const { return value(r); }

  Scalar value(Scalar r) const {
    const Scalar a = std::abs(r);
    if (a <= 1) return clenshaw(inner_, r);
    if (std::isinf(a)) return std::copysign(f_inf_, r);
    const Scalar q = 1 / (a * a);
    return std::copysign(f_inf_ - std::pow(a, -(1 + s_)) * clenshaw(outer_, 2 * q - 1), r);
  }

  Scalar derivative(Scalar r) const {
    if (std::isinf(r)) return 0;
    return std::pow(1 + r * r, -(2 + s_) / 2);
  }

 private:
  Scalar h_direct(Scalar q, const QuadratureRule<Scalar>& rule) const {
    Scalar acc = 0;
    for (Eigen::Index k = 0; k < rule.size(); ++k) {
      const Scalar v = rule.nodes(k);
      acc += rule.weights(k) * std::pow(1 + q * v * v, -(2 + s_) / 2);
    }
    return acc;
  }

  template <std::size_t N>
  static Scalar dct(const std::array<Scalar, N>& f, int k) {
    Scalar acc = 0;
    for (std::size_t j = 0; j < N; ++j) {
      acc += f[j] * std::cos(std::numbers::pi_v<Scalar> * k * (j + Scalar(0.5)) / N);
    }
    return 2 * acc / N;
  }

  template <std::size_t N>
  static Scalar clenshaw(const std::array<Scalar, N>& c, Scalar x) {
    Scalar b1 = 0, b2 = 0;
    for (int k = int(N) - 1; k >= 1; --k) {
      const Scalar b0 = 2 * x * b1 - b2 + c[k];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + c[0] / 2;
  }

  Scalar s_;
  Scalar f_inf_;
  std::array<Scalar, kInner> inner_{};
  std::array<Scalar, kOuter> outer_{};
};

}  // namespace stickygraph
