#include <cmath>
#include <random>

#include "doctest.h"
#include "stickygraph/analysis.hpp"
#include "stickygraph/errors.hpp"
#include "stickygraph/solver.hpp"

using namespace stickygraph;

namespace {

// Exterior = ext(x) outside [0,1], interior = in(x) on a wall-graded grid.
GraphProfile synthetic(const std::function<double(double)>& in, const std::function<double(double)>& ext,
                       Index n = 129, double ratio = 0.8) {
  const Grid g = slab_grid(n, ratio);
  const Vec lx = Vec::LinSpaced(41, -2, 0), rx = Vec::LinSpaced(41, 1, 3);
  return GraphProfile({Piece::interpolating(lx, lx.unaryExpr(ext)), Piece::interpolating(g.nodes, g.nodes.unaryExpr(in)),
                       Piece::interpolating(rx, rx.unaryExpr(ext))},
                      ExteriorModel::linear(0, ext(-2)), ExteriorModel::linear(0, ext(3)));
}

double zero(double) { return 0.0; }

}  // namespace

TEST_CASE("boundary limit: jump and verdict") {
  const auto sticky = synthetic([](double x) { return 0.3 + std::pow(x, 1.7); }, zero);
  const auto r = boundary_limit(sticky, Side::left);
  CHECK(std::abs(r.jump - 0.3) < 1e-8);
  CHECK(r.verdict == StickinessReport::Verdict::sticky);
  REQUIRE(r.clean_region);
  CHECK(r.clean_region->fill == Fill::full);
  CHECK(clean_region_holds(sticky, r));

  const auto cont = synthetic([](double x) { return std::pow(x, 1.7) * std::pow(1 - x, 1.3); }, zero);
  CHECK(boundary_limit(cont, Side::left).verdict == StickinessReport::Verdict::continuous);
  CHECK(boundary_limit(cont, Side::right).verdict == StickinessReport::Verdict::continuous);
  CHECK(std::abs(boundary_limit(cont, Side::right).jump) < 1e-10);

  const auto below = synthetic([](double x) { return -0.2 - x; }, zero);
  const auto rb = boundary_limit(below, Side::left);
  CHECK(rb.verdict == StickinessReport::Verdict::sticky);
  CHECK(rb.clean_region->fill == Fill::empty);
  CHECK(std::abs(rb.jump + 0.2) < 1e-10);
}

TEST_CASE("boundary exponent of synthetic profiles") {
  const auto a = synthetic([](double x) { return 2 * std::pow(x, 1.7); }, zero);
  const auto f = fit_boundary_exponent(a, 0, Side::left);
  CHECK(std::abs(f.exponent - 1.7) < 1e-6);
  CHECK(std::abs(f.coefficient - 2) < 1e-5);
  CHECK(f.r_squared > 0.999999);

  // Tilted profile: l x + x^{(3+s)/2}, s = 1/2.
  const double l = 0.8;
  const auto t = synthetic([l](double x) { return l * x + std::pow(x, 1.75); }, [l](double x) { return l * x; });
  CHECK(std::abs(fit_boundary_exponent(t, l, Side::left).exponent - 1.75) < 1e-3);
  FitWindow ext;
  ext.reference = FitWindow::Reference::exterior_datum;
  CHECK(std::abs(fit_boundary_exponent(t, l, Side::left, ext).exponent - 1.75) < 1e-3);

  // Right wall: distance 1 - x.
  const auto r = synthetic([](double x) { return std::pow(1 - x, 1.4); }, zero);
  CHECK(std::abs(fit_boundary_exponent(r, 0, Side::right).exponent - 1.4) < 1e-6);
}

TEST_CASE("exponent recovery sweep with noise") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0, 1e-6);
  for (double p : {1.2, 1.5, 1.75, 1.9}) {
    const auto clean = synthetic([p](double x) { return std::pow(x, p); }, zero);
    CHECK(std::abs(fit_boundary_exponent(clean, 0, Side::left).exponent - p) < 1e-6);
    // Noise relative to the local size keeps the log-log fit meaningful.
    const auto noisy = synthetic([&, p](double x) { return std::pow(x, p) * (1 + noise(rng)); }, zero);
    CHECK(std::abs(fit_boundary_exponent(noisy, 0, Side::left).exponent - p) < 1e-3);
  }
}

TEST_CASE("fit needs enough points") {
  std::vector<std::pair<double, double>> pts{{1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS(fit_power_law(pts), DegenerateFitError);
}

TEST_CASE("inverse graph near a sticky wall") {
  // u = L + |x|^{1/1.75}: inverse x = |u - L|^1.75.
  const double L = 0.05;
  const auto g = synthetic([L](double x) { return L + std::pow(x, 1 / 1.75); }, zero);
  const auto f = invert_graph_near_sticky(g, Side::left);
  CHECK(std::abs(f.exponent - 1.75) < 1e-4);
  CHECK(std::abs(f.coefficient - 1) < 1e-3);

  const auto flat = synthetic([](double) { return 0.3; }, zero);
  CHECK_THROWS_AS(invert_graph_near_sticky(flat, Side::left), InversionError);
  const auto cont = synthetic([](double x) { return std::pow(x, 1.5); }, zero);
  CHECK_THROWS_AS(invert_graph_near_sticky(cont, Side::left), InversionError);
}

TEST_CASE("rescalings") {
  const auto g = synthetic([](double x) { return 0.4 * x + std::pow(x, 1.6); }, [](double x) { return 0.4 * x; });
  // Group law: (u_a)_b = u_{ab}.
  const auto ab = blowup_rescale(blowup_rescale(g, 2), 3);
  const auto direct = blowup_rescale(g, 6);
  for (double y : {-1.0, 0.3, 1.7, 4.2, 5.9}) CHECK(std::abs(ab.value(y) - direct.value(y)) < 1e-12);
  CHECK(std::abs(blowup_rescale(g, 4).value(2.0) - 4 * g.value(0.5)) < 1e-12);

  // Vertical rescale round trip.
  const auto v = vertical_rescale(g, 0.4, 0.1);
  for (double y : {-1.5, 0.01, 0.5, 0.99, 2.5}) CHECK(std::abs(0.4 * y + 0.1 * v.value(y) - g.value(y)) < 1e-12);
  CHECK_THROWS_AS(vertical_rescale(g, 0.4, 0.0), ParameterError);
  CHECK_THROWS_AS(blowup_rescale(g, -1), ParameterError);
}

TEST_CASE("flatness and oscillation decay") {
  const double alpha = 0.6;
  const auto g = synthetic([=](double x) { return 0.2 * x + std::pow(x, 1 + alpha); },
                           [](double x) { return 0.2 * x; }, 257, 0.85);
  const auto lv = flatness_profile(g, 0.2, Side::left, 10);
  for (std::size_t j = 2; j < lv.size(); ++j) CHECK(std::abs(lv[j].ratio - std::pow(2, -(1 + alpha))) < 1e-3);

  const double eta = 0.5;
  const auto osc = oscillation_decay(g, 0.2, eta, 6);
  // Left of the wall u = l x exactly, so the sup comes from the right side.
  for (std::size_t m = 1; m < osc.size(); ++m) {
    CHECK(std::abs(osc[m].ratio - std::pow(eta, 1 + alpha)) < 1e-3);
  }
  CHECK_THROWS_AS(oscillation_decay(g, 0.2, 1.5), ParameterError);
}
