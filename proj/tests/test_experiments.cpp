#include <cmath>

#include "doctest.h"
#include "stickygraph/errors.hpp"
#include "stickygraph/experiments.hpp"

using namespace stickygraph;

namespace {

ExperimentConfig coarse(Shape v, Shape phi, std::vector<double> t) {
  ExperimentConfig c;
  c.v = std::move(v);
  c.phi = std::move(phi);
  c.t_values = std::move(t);
  c.grid = {33, 0.8};
  return c;
}

}  // namespace

TEST_CASE("barrier parameter gate") {
  const FracParams p(0.5);
  BarrierParams bp;
  CHECK_NOTHROW(bp.validate(p));
  auto rejects = [&](auto mutate) {
    BarrierParams q;
    mutate(q);
    CHECK_THROWS_AS(q.validate(p), ParameterError);
  };
  rejects([](BarrierParams& q) { q.L = 4999; });  // c / eps^(1/s) = 5000
  rejects([](BarrierParams& q) { q.alpha = 0.5; });
  rejects([](BarrierParams& q) { q.alpha = 0; });
  rejects([](BarrierParams& q) { q.lambda = 0; });
  rejects([](BarrierParams& q) { q.a = 0; });
  rejects([](BarrierParams& q) { q.b = -1; });
  rejects([](BarrierParams& q) { q.c = 0; });
  rejects([](BarrierParams& q) { q.eps = 1; });
  rejects([](BarrierParams& q) { q.ell_bar = 2; });
  rejects([](BarrierParams& q) { q.mu_probe = q.lambda / 8; });
  // The gate scales with s.
  BarrierParams q;
  q.alpha = 0.1;
  CHECK_THROWS_AS(q.validate(FracParams(0.25)), ParameterError);
  q.L = 0.5 / std::pow(0.01, 4.0);
  CHECK_NOTHROW(q.validate(FracParams(0.25)));
}

TEST_CASE("barrier profile pieces") {
  BarrierParams bp;
  bp.ell_bar = 0.3;
  CHECK(bp.value(-1) == doctest::Approx(-0.3));
  CHECK(bp.value(0.25) == doctest::Approx((0.3 + 0.01) * 0.25));
  CHECK(bp.value(2) == doctest::Approx(0.6 - 0.1 * std::pow(2.0, 1.25)));
  CHECK(std::isinf(bp.value(bp.L)));
}

TEST_CASE("barrier curvature is continuous in eps") {
  const FracParams p(0.5);
  const double x1 = 1e-3;
  BarrierParams bp;
  bp.L = 1e4;
  const double h0 = barrier_curvature(p, bp, x1);
  double prev = INFINITY;
  for (double de : {1e-3, 1e-4, 1e-5}) {
    BarrierParams q = bp;
    q.eps += de;
    const double gap = std::abs(barrier_curvature(p, q, x1) - h0);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("barrier is negative close enough to the corner") {
  const FracParams p(0.5);
  BarrierParams bp;
  CHECK(barrier_curvature(p, bp, 1e-4) < 0);
  CHECK(barrier_curvature(p, bp, bp.mu_probe / 2) > 0);
}

TEST_CASE("experiment config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.t_values = {0.5, 0.25};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.t_values = {};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = ExperimentConfig{};
  c.grid.n = 9;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = ExperimentConfig{};
  c.r_tail = 2;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("zero phi is not generic") {
  const auto r = run_genericity(coarse(Shape::zero(), Shape::zero(), {0, 0.5}));
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(row.converged);
    CHECK(std::abs(row.left.jump) < 1e-12);
    CHECK(std::abs(row.right.jump) < 1e-12);
  }
  CHECK_FALSE(r.passed());
}

TEST_CASE("flat data: both walls continuous") {
  const auto r = run_alternative(coarse(Shape::zero(), Shape::zero(), {0}));
  for (const auto* c : {&r.left, &r.right}) {
    CHECK(c->limit.verdict == StickinessReport::Verdict::continuous);
    CHECK(c->branch != SideClassification::Branch::sticky);
  }
  CHECK(r.residual_inf < 1e-9);
  CHECK(r.left.target == doctest::Approx(1.75));
}

TEST_CASE("zero perturbation linearizes to zero") {
  ExperimentConfig c = coarse(Shape::zero(), Shape::zero(), {0});
  const auto r = run_linearization(c, 0, {0.2, 0.1});
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) CHECK(row.sup_distance < 1e-12);
  CHECK(r.sigma == doctest::Approx(0.75));
}

TEST_CASE("halfplane satisfies the equation up to the wall") {
  ExperimentConfig c = coarse(Shape::linear(0.5, 0.1), Shape::zero(), {0});
  const auto r = run_boundary_equation(c);
  CHECK_FALSE(r.sticky);
  CHECK(r.approach.size() == 8);
  CHECK(r.passed());
}
