#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "stickygraph/errors.hpp"
#include "stickygraph/grid.hpp"
#include "stickygraph/kernel.hpp"

using namespace stickygraph;

namespace {
// Values from an adaptive arbitrary-precision quadrature of cos^s, frozen.
constexpr double kF2Half = 0.989284009500578374826267570236;
constexpr double kFinfHalf = 1.19814023473559220743992249228;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("cap_f reference values") {
  const FracParams half(0.5);
  CHECK(cap_f(0.0, half) == 0.0);
  CHECK(std::abs(cap_f(1.0, FracParams(1e-6)) - std::numbers::pi / 4) < 1e-4);
  CHECK(std::abs(cap_f(2.0, half) - kF2Half) < 1e-10);
  CHECK(std::abs(cap_f(0.7, FracParams(0.3)) - 0.599085539174019580089725993222) < 1e-12);
  CHECK(cap_f(kInf, half) == cap_f_infinity(half));
  CHECK(cap_f(-kInf, half) == -cap_f_infinity(half));
  CHECK_THROWS_AS(cap_f(std::numeric_limits<double>::quiet_NaN(), half), DomainError);
  CHECK_THROWS_AS(FracParams(1.2), ParameterError);
  CHECK_THROWS_AS(FracParams(0.0), ParameterError);
}

TEST_CASE("cap_f_prime") {
  CHECK(cap_f_prime(0.0, FracParams(0.3)) == 1.0);
  CHECK(std::abs(cap_f_prime(1.0, FracParams(0.5)) - std::pow(2.0, -1.25)) < 1e-15);
  const FracParams p(0.3);
  const double h = 1e-5;
  const double fd = (cap_f(0.7 + h, p) - cap_f(0.7 - h, p)) / (2 * h);
  CHECK(std::abs(cap_f_prime(0.7, p) - fd) < 1e-8);
}

TEST_CASE("F_inf limits and two-rule agreement") {
  CHECK(std::abs(cap_f_infinity(FracParams(1e-6)) - std::numbers::pi / 2) < 1e-4);
  CHECK(std::abs(cap_f_infinity(FracParams(1 - 1e-6)) - 1.0) < 1e-4);
  const FracParams half(0.5);
  CHECK(std::abs(cap_f_infinity(half) - kFinfHalf) < 1e-12);
  // Doubled node count on both sub-rules.
  const double twice = detail::cap_f_core<double>(1.0, 0.5) +
                       detail::cap_f_complement<double>(1.0, 0.5, left_power_rule<double>(64, 0.5));
  CHECK(std::abs(twice - cap_f_infinity(half)) < 1e-12);
  double prev = 2;
  for (double s = 0.05; s < 1; s += 0.05) {
    const double v = cap_f_infinity(FracParams(s));
    CHECK(v > 1);
    CHECK(v < std::numbers::pi / 2);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("cap_f invariants over a sweep") {
  for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const FracParams p(s);
    const double finf = cap_f_infinity(p);
    double prev = -finf;
    for (double r = -10; r <= 10 + 1e-12; r += 0.05) {
      const double f = cap_f(r, p);
      CHECK(std::abs(f + cap_f(-r, p)) <= 1e-14);
      CHECK(f > prev);
      CHECK(std::abs(f) < finf);
      prev = f;
      const double h = 1e-4;
      const double fd = (cap_f(r + h, p) - cap_f(r - h, p)) / (2 * h);
      CHECK(std::abs(cap_f_prime(r, p) - fd) <= 1e-7);
    }
    CHECK(std::abs(cap_f(1e8, p)) < finf);
  }
}

TEST_CASE("ColumnKernel matches the reference evaluation") {
  for (double s : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    const FracParams p(s);
    const ColumnKernel<double> K(p);
    CHECK(std::abs(K.f_inf() - cap_f_infinity(p)) < 1e-14);
    for (double r : {-1e6, -40.0, -3.0, -1.0, -0.3, 0.0, 1e-9, 0.5, 0.999, 1.0, 1.001, 2.0, 17.0, 1e4}) {
      CHECK(std::abs(K(r) - cap_f(r, p)) < 4e-15);
    }
  }
}

TEST_CASE("graded grids") {
  auto g = make_graded_grid({0, 1}, 5, Grading::uniform());
  for (int i = 0; i < 5; ++i) CHECK(std::abs(g[i] - 0.25 * i) < 1e-15);
  g = make_graded_grid({0, 1}, 4, Grading::geometric(0.5, Cluster::left));
  CHECK(std::abs(g[1] - 1.0 / 7) < 1e-15);
  CHECK(std::abs(g[2] - 3.0 / 7) < 1e-15);
  CHECK(g[3] == 1.0);
  g = make_graded_grid({-2, 2}, 9, Grading::uniform());
  for (int i = 0; i + 1 < 9; ++i) CHECK(std::abs(g[i + 1] - g[i] - 0.5) < 1e-15);
  g = make_graded_grid({0, 1}, 33, Grading::geometric(0.8, Cluster::both));
  CHECK(g[0] == 0.0);
  CHECK(g[32] == 1.0);
  CHECK(std::abs(g.min_gap() - (g[1] - g[0])) < 1e-15);
  CHECK(std::abs((g[1] - g[0]) - (g[32] - g[31])) < 1e-15);
  for (int i = 0; i + 1 < 33; ++i) CHECK(g[i + 1] > g[i]);
  CHECK_THROWS_AS(make_graded_grid({0, 1}, 1, Grading::uniform()), ParameterError);
  CHECK_THROWS_AS(make_graded_grid({0, 1}, 5, Grading::geometric(1.0, Cluster::left)), ParameterError);
}
