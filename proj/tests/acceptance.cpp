// One PASS/FAIL line per acceptance criterion, on stdout and in
// acceptance_report.txt. Exits 0 once every criterion has run; the lines
// carry the verdicts. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "stickygraph/analysis.hpp"
#include "stickygraph/cli_io.hpp"
#include "stickygraph/curvature.hpp"
#include "stickygraph/experiments.hpp"
#include "stickygraph/kernel.hpp"
#include "stickygraph/linear_frac.hpp"
#include "stickygraph/solver.hpp"

using namespace stickygraph;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// ---- 1. kernel ----

Outcome kernel_suite() {
  double worst_odd = 0, worst_fd = 0;
  bool monotone = true, bounded = true;
  for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const FracParams p(s);
    const double finf = cap_f_infinity(p);
    double prev = -finf;
    for (double r = -10; r <= 10 + 1e-12; r += 0.05) {
      const double f = cap_f(r, p);
      worst_odd = std::max(worst_odd, std::abs(f + cap_f(-r, p)));
      monotone = monotone && f > prev;
      bounded = bounded && std::abs(f) < finf;
      prev = f;
      const double h = 1e-4;
      worst_fd = std::max(worst_fd, std::abs(cap_f_prime(r, p) - (cap_f(r + h, p) - cap_f(r - h, p)) / (2 * h)));
    }
    bounded = bounded && std::abs(cap_f(1e8, p)) < finf;
  }
  const double e0 = std::abs(cap_f_infinity(FracParams(1e-6)) - std::numbers::pi / 2);
  const double e1 = std::abs(cap_f_infinity(FracParams(1 - 1e-6)) - 1);
  const bool pass = worst_odd <= 1e-14 && monotone && bounded && worst_fd <= 1e-7 && e0 <= 1e-4 && e1 <= 1e-4;
  return {pass, fmt("odd %.1e, monotone %d, bounded %d, |F'-fd| %.1e, F_inf limits %.1e %.1e", worst_odd, monotone,
                    bounded, worst_fd, e0, e1)};
}

// ---- 2. curvature oracle ----

GraphProfile smooth_profile(const std::function<double(double)>& u, const std::function<double(double)>& du,
                            double slope, double lo = -8, double hi = 8, Index n = 1601) {
  const Vec x = Vec::LinSpaced(n, lo, hi);
  return GraphProfile({Piece::hermite(x, x.unaryExpr(u), x.unaryExpr(du))},
                      ExteriorModel::linear(slope, u(lo) - slope * lo), ExteriorModel::linear(slope, u(hi) - slope * hi));
}

Outcome curvature_oracle() {
  const FracParams p(0.5);
  RadialPanels rp;
  rp.growth = 1.1;
  rp.theta_tol = 1e-7;
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const double a = 0.2 + 0.4 * U(rng), c = U(rng) - 0.5, w = 0.5 + 0.5 * U(rng), tilt = U(rng) - 0.5;
    const double x1 = c + (U(rng) - 0.5) * w;
    auto prof = smooth_profile([=](double y) { return tilt * y + a * std::exp(-(y - c) * (y - c) / (w * w)); },
                               [=](double y) {
                                 return tilt - 2 * a * (y - c) / (w * w) * std::exp(-(y - c) * (y - c) / (w * w));
                               },
                               tilt);
    const Point at{x1, prof.value(x1)};
    const double col = nmc_graph(prof, at, p).value;
    const double bf = nmc_bruteforce2d([&prof](double y1, double y2) { return y2 < prof.value(y1); }, at, p, rp);
    worst = std::max(worst, std::abs(col - bf) / std::abs(col));
  }
  double half = 0;
  for (double slope : {0.0, 0.7, -2.0}) {
    const Vec x = Vec::LinSpaced(61, -3, 3);
    const GraphProfile hp({Piece::interpolating(x, slope * x)}, ExteriorModel::linear(slope, 0),
                          ExteriorModel::linear(slope, 0));
    for (double x1 : {0.0, 0.37, 1.3}) half = std::max(half, std::abs(nmc_graph(hp, {x1, slope * x1}, p).value));
  }
  auto bump = [](double k) {
    return smooth_profile([=](double y) { return 0.2 * y + k * 0.3 * std::exp(-(y / k) * (y / k)); },
                          [=](double y) { return 0.2 - 0.6 * (y / k) * std::exp(-(y / k) * (y / k)); }, 0.2, -8 * k,
                          8 * k);
  };
  const auto base = bump(1);
  const Point at{0.4, base.value(0.4)};
  const double h = nmc_graph(base, at, p).value;
  double dil = 0;
  for (double k : {2.0, 4.0, 8.0}) {
    const double hk = nmc_graph(bump(k), {k * at.x1, k * at.x2}, p).value;
    dil = std::max(dil, std::abs(hk - std::pow(k, -p.s) * h) / std::abs(h));
  }
  return {worst <= 5e-4 && half <= 1e-6 && dil <= 1e-6,
          fmt("20 profiles: max rel gap %.2e; halfplane |H| %.1e; dilation rel %.1e", worst, half, dil)};
}

// ---- 3. solver principles ----

SlabProblem slab(Shape v) {
  SlabProblem p;
  p.params = FracParams(0.5);
  p.exterior.v = std::move(v);
  // Coarsest gap 2.7e-6: a vertical offset costs under 1e-7 in roundoff
  // near the walls (1e-3 at the 1.6e-9 gap of ratio 0.75).
  p.interior_grid = slab_grid(129, 0.85);
  return p;
}

Outcome solver_principles() {
  const double tol = SolveOptions{}.tol;
  const Shape base = Shape::spline_bump(1.5, 2.5, 1.0);
  const auto r0 = solve(slab(base));
  if (!r0.converged) return {false, "base solve did not converge"};
  const auto shifted = solve(slab(base + Shape::linear(0, 0.25)));
  const double trans = (shifted.u.array() - r0.u.array() - 0.25).abs().maxCoeff();
  const auto neg = solve(slab(base.scaled(-1)));
  const double odd = (neg.u + r0.u).cwiseAbs().maxCoeff();

  // Ordered pairs v1 <= v2; the lower datum of the last two is the base.
  const std::vector<std::pair<Shape, Shape>> pairs = {
      {Shape::zero(), base},
      {base, Shape::spline_bump(1.5, 2.5, 1.5)},
      {base, base + Shape::spline_bump(-2.5, -1.5, 0.5)},
  };
  double violation = -INFINITY;
  bool all_converged = shifted.converged && neg.converged;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto a = k == 0 ? solve(slab(pairs[k].first)) : r0;
    const auto b = solve(slab(pairs[k].second));
    all_converged = all_converged && a.converged && b.converged;
    violation = std::max(violation, (a.u - b.u).maxCoeff());
  }
  const bool pass = all_converged && trans <= tol && odd <= tol && violation <= tol;
  return {pass, fmt("n=129 ratio 0.85: translation %.1e, odd symmetry %.1e, max(u1 - u2) %.1e (tol %.0e)", trans, odd,
                    violation, tol)};
}

// ---- 4. genericity ----

ExperimentConfig canonical() {
  ExperimentConfig c;
  c.params = FracParams(0.5);
  c.phi = Shape::spline_bump(2, 3, 8);
  c.t_values = {0, 0.25, 0.5, 1.0};
  return c;
}

Outcome genericity() {
  const auto r = run_genericity(canonical());
  std::string d;
  for (const auto& row : r.rows) {
    d += fmt("t=%g: %.2e/%.2e (thr %.1e/%.1e); ", row.t, row.left.jump, row.right.jump, row.left.threshold,
             row.right.threshold);
  }
  for (const auto& f : r.failures) d += "[" + f + "] ";
  return {r.passed(), d};
}

// ---- 5. boundary alternative ----

struct TunedCase {
  double s, a0;
};

ExperimentConfig symmetric_flat(double s, FlatWallTuning& tu, double a0) {
  ExperimentConfig c;
  c.params = FracParams(s);
  c.grid = {65, 0.85};
  c.v = Shape::spline_bump(1.5, 2.5, 1) + Shape::spline_bump(-1.5, -0.5, 1);
  tu.probe = (Shape::spline_bump(2.5, 3.5, 1) + Shape::spline_bump(-2.5, -1.5, 1)).scaled(-1);
  tu.a0 = a0;
  tu.a1 = 1.5 * a0;
  return c;
}

std::optional<double> tuned_amplitude_half;

Outcome alternative() {
  bool pass = true;
  std::string d;
  for (const TunedCase tc : {TunedCase{0.25, 5}, TunedCase{0.5, 8}, TunedCase{0.75, 16}}) {
    FlatWallTuning tu;
    const auto c = symmetric_flat(tc.s, tu, tc.a0);
    const auto r = run_alternative(c, tu);
    if (tc.s == 0.5) tuned_amplitude_half = r.amplitude;
    for (const auto* side : {&r.left, &r.right}) {
      const bool ok = side->branch == SideClassification::Branch::continuous && side->fit &&
                      std::abs(side->fit->exponent - side->target) <= 0.15;
      pass = pass && ok;
      d += fmt("s=%.2f %s %s %.3f (target %.3f); ", tc.s, side->side == Side::left ? "L" : "R",
               to_string(side->branch).c_str(), side->fit ? side->fit->exponent : NAN, side->target);
    }
  }
  ExperimentConfig st = canonical();
  st.t_values = {1.0};
  const auto r = run_alternative(st);
  for (const auto* side : {&r.left, &r.right}) {
    const bool ok = side->branch == SideClassification::Branch::sticky && side->fit &&
                    std::abs(side->fit->exponent - side->target) <= 0.2;
    pass = pass && ok;
    d += fmt("sticky %s %s inverse %.3f (target %.3f); ", side->side == Side::left ? "L" : "R",
             to_string(side->branch).c_str(), side->fit ? side->fit->exponent : NAN, side->target);
  }
  return {pass, d};
}

// ---- 6. barrier ----

Outcome barrier() {
  const FracParams p(0.5);
  const BarrierParams bp;
  bp.validate(p);
  const auto r = run_barrier_check(p, bp, 8, 2);
  int checked = 0;
  for (const auto& pr : r.probes) checked += pr.bruteforce ? 1 : 0;
  const bool cross = checked >= 2 && r.max_bruteforce_gap <= 1e-3;
  std::string vals;
  for (const auto& pr : r.probes) vals += fmt("%.3g ", pr.column);
  return {r.all_nonpositive && r.probes.size() >= 8 && cross,
          fmt("L=%g >= c/eps^(1/s)=%g; probes in (0, %g): ", bp.L, bp.c / std::pow(bp.eps, 1 / p.s), bp.mu_probe) +
              vals + fmt("; brute-force gap %.1e; sign change near x1=%.2e", r.max_bruteforce_gap, r.crossover)};
}

// ---- 7. linearization ----

Outcome linearization() {
  bool pass = true;
  std::string d;
  for (double slope : {0.0, 1.0}) {
    ExperimentConfig c;
    c.params = FracParams(0.5);
    c.grid = {65, 0.85};
    c.phi = Shape::spline_bump(1.5, 2.5, 1);
    const auto r = run_linearization(c, slope, {0.2, 0.1, 0.05});
    pass = pass && r.decreasing;
    d += fmt("slope %g:", slope);
    for (const auto& row : r.rows) d += fmt(" %.4e", row.sup_distance);
    d += r.decreasing ? " (decreasing); " : " (not decreasing); ";
  }
  return {pass, d};
}

// ---- 8. boundary equation ----

Outcome boundary_equation() {
  FlatWallTuning tu;
  ExperimentConfig c = symmetric_flat(0.5, tu, 8);
  if (!tuned_amplitude_half) tuned_amplitude_half = run_alternative(c, tu).amplitude;
  if (!tuned_amplitude_half) return {false, "tuning did not return an amplitude"};
  c.v = c.v + tu.probe.scaled(*tuned_amplitude_half);
  const auto smooth = run_boundary_equation(c);
  ExperimentConfig st = canonical();
  st.t_values = {1.0};
  const auto sticky = run_boundary_equation(st);
  const bool pass = !smooth.sticky && smooth.passed() && sticky.sticky && sticky.passed();
  double approach = 0;
  for (const auto& [dist, h] : sticky.approach) approach = std::max(approach, h);
  return {pass, fmt("non-sticky max |H| %.1e; sticky: approach max |H| %.1e, at the limit point %.3g (tol %.0e)",
                    smooth.max_abs, approach, sticky.limit_point_value, smooth.tol)};
}

// ---- 9. linear toolbox ----

Outcome linear_toolbox() {
  auto graded = [](double lo, double hi, Index n, double ratio) {
    return make_graded_grid({lo, hi}, n, Grading::geometric(ratio, Cluster::both));
  };
  auto wall_exponent = [](const Grid& g, const Vec& v) {
    std::vector<std::pair<double, double>> pts;
    const double h = g.min_gap();
    for (Index k = 1; k < g.size(); ++k) {
      if (g.nodes(k) >= 4 * h && g.nodes(k) <= 40 * h) pts.push_back({g.nodes(k) - g.domain.lo, v(k)});
    }
    return fit_power_law(pts).exponent;
  };
  const ExteriorFunction step{[](double y) { return y >= 1 ? 1.0 : 0.0; }, {}};
  const ExteriorFunction bump{[](double y) {
                                const double z = (y - 2) / 0.5;
                                return std::abs(z) < 1 ? std::exp(1 - 1 / (1 - z * z)) : 0.0;
                              },
                              {1.5, 2.5}};
  double const_err = 0, mp_violation = 0, exp_err = 0;
  for (double sigma : {0.625, 0.75, 0.875}) {
    const auto g65 = graded(0, 1, 65, 0.8);
    const auto one = poisson_extension(ExteriorFunction::constant(1), sigma, g65);
    const_err = std::max(const_err, (one.values.array() - 1).abs().maxCoeff());
    for (const auto& data : {step, bump}) {
      const auto e = poisson_extension(data, sigma, g65);
      mp_violation = std::max({mp_violation, -e.values.minCoeff(), e.values.maxCoeff() - 1});
    }
    const auto g = graded(0, 1, 129, 0.8);
    exp_err = std::max(exp_err, std::abs(wall_exponent(g, poisson_extension(step, sigma, g).values) - sigma));
    const auto gd = graded(0, 2, 129, 0.9);
    const auto u = dirichlet_solve([](double) { return 1.0; }, sigma, gd);
    exp_err = std::max(exp_err, std::abs(wall_exponent(gd, u.values) - sigma));
  }
  return {const_err <= 1e-8 && mp_violation <= 0 && exp_err <= 0.02,
          fmt("constants %.1e, max principle violation %.1e, exponent error %.4f", const_err,
              std::max(mp_violation, 0.0), exp_err)};
}

// ---- 10. IO ----

int dispatch(std::vector<std::string> args) {
  args.insert(args.begin(), "stickygraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  // Quiet: the messages are part of the contract but not of this report.
  std::ostringstream sink;
  auto* old_err = std::cerr.rdbuf(sink.rdbuf());
  auto* old_out = std::cout.rdbuf(sink.rdbuf());
  const int code = main_dispatch(int(argv.size()), argv.data());
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  return code;
}

Outcome io() {
  // Config round trip, including values that need all 17 digits.
  const std::string text = R"({"s": 0.30000000000000004, "alpha": 0.1,
    "grid": {"n": 97, "ratio": 0.9},
    "exterior": {"v": {"kind": "linear", "slope": 0.1, "offset": 0.7},
                 "phi": [{"kind": "spline_bump", "lo": 2, "hi": 3, "height": 0.333333333333333315}]},
    "t_values": [0, 1e-7, 0.5], "seed": 3,
    "tuning": {"probe": {"kind": "compact_bump", "center": -3, "radius": 0.5, "height": 1}, "a0": 2.5, "a1": 3}})";
  const std::string once = serialize_config(parse_config(text));
  const bool config_rt = serialize_config(parse_config(once)) == once;

  // Report decimal round trip.
  LinearizationReport rep;
  rep.sigma = 0.75;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-20, 0);
  for (int k = 0; k < 50; ++k) rep.rows.push_back({std::pow(10.0, U(rng)), std::pow(10.0, U(rng)), 1.0 / (k + 3), k});
  const fs::path dir = fs::temp_directory_path() / "stickygraph_acceptance_io";
  fs::remove_all(dir);
  write_report(to_doc(rep), dir);
  std::ifstream f(dir / "linearization.json");
  const auto body = nlohmann::json::parse(f);
  bool report_rt = body["rows"].size() == rep.rows.size();
  for (std::size_t k = 0; report_rt && k < rep.rows.size(); ++k) {
    report_rt = body["rows"][k]["eps"].get<double>() == rep.rows[k].eps &&
                body["rows"][k]["sup_distance"].get<double>() == rep.rows[k].sup_distance &&
                body["rows"][k]["residual_inf"].get<double>() == rep.rows[k].residual_inf;
  }

  // Exit-code contract on the invalid corpus.
  const fs::path corpus = fs::path(STICKYGRAPH_TEST_DATA) / "invalid";
  int cases = 0, ok = 0;
  for (const auto& e : fs::directory_iterator(corpus)) {
    if (e.path().extension() != ".json") continue;
    ++cases;
    ok += dispatch({"solve", "-c", e.path().string(), "-o", (dir / "never").string()}) == 2 ? 1 : 0;
  }
  const bool never_written = !fs::exists(dir / "never");
  const bool help = dispatch({"--help"}) == 0 && dispatch({}) == 2;
  const bool pass = config_rt && report_rt && cases >= 50 && ok == cases && never_written && help;
  return {pass, fmt("config round trip %d, report round trip %d, invalid corpus %d/%d exit 2, help/usage %d", config_rt,
                    report_rt, ok, cases, help)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"kernel suite", kernel_suite},
      {"curvature oracle equivalence", curvature_oracle},
      {"solver principles", solver_principles},
      {"genericity", genericity},
      {"boundary alternative", alternative},
      {"barrier", barrier},
      {"linearization", linearization},
      {"boundary equation", boundary_equation},
      {"linear toolbox", linear_toolbox},
      {"io", io},
  };
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  int passed = 0, ran = 0;
  // Also kept in a file so that the verdicts survive a quiet ctest run.
  std::ofstream report("acceptance_report.txt");
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = int(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string line = fmt("criterion %2d %-30s %s  [%.1fs] ", id, criteria[k].first.c_str(),
                                 o.pass ? "PASS" : "FAIL", secs) + o.detail;
    std::puts(line.c_str());
    std::fflush(stdout);
    report << line << "\n";
    ++ran;
    passed += o.pass ? 1 : 0;
  }
  std::printf("%d/%d criteria pass\n", passed, ran);
  report << passed << "/" << ran << " criteria pass\n";
  return 0;
}
