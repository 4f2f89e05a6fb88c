#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "stickygraph/errors.hpp"

namespace stickygraph {

/// Fractional order s of the perimeter, with the derived linearized order
/// sigma = (1+s)/2 and the exterior-data Hoelder exponent alpha.
template <typename Scalar = double>
struct FracParamsT {
  Scalar s;
  Scalar sigma;
  Scalar alpha;
  Scalar gamma;

  FracParamsT(Scalar s_, Scalar alpha_) : s(s_), sigma((1 + s_) / 2), alpha(alpha_) {
    if (!(s > 0 && s < 1)) {
      throw ParameterError("s must lie in the open interval (0,1), got " + std::to_string(double(s)));
    }
    if (!(alpha > 0 && alpha < 1)) {
      throw ParameterError("alpha must lie in (0,1), got " + std::to_string(double(alpha)));
    }
    gamma = std::min(alpha, sigma);
  }

  /// alpha defaults to the midpoint of (s,1), which is what the boundary
  /// regularity experiments need.
  explicit FracParamsT(Scalar s_) : FracParamsT(s_, checked_mid(s_)) {}

  /// Exponent expected for u - l*x at a non-sticky wall: 1 + min(alpha, sigma).
  Scalar boundary_exponent() const { return 1 + gamma; }

  bool alpha_exceeds_s() const { return alpha > s; }

 private:
  static Scalar checked_mid(Scalar s_) {
    if (!(s_ > 0 && s_ < 1)) {
      throw ParameterError("s must lie in the open interval (0,1), got " + std::to_string(double(s_)));
    }
    return (s_ + 1) / 2;
  }
};

using FracParams = FracParamsT<double>;

}  // namespace stickygraph
