#include "stickygraph/grid.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "stickygraph/errors.hpp"

namespace stickygraph {

double Grid::min_gap() const {
  double g = nodes(1) - nodes(0);
  for (Index i = 1; i + 1 < size(); ++i) g = std::min(g, nodes(i + 1) - nodes(i));
  return g;
}

Index Grid::locate(double x) const {
  auto it = std::upper_bound(nodes.data(), nodes.data() + nodes.size(), x);
  Index k = Index(it - nodes.data()) - 1;
  return std::clamp<Index>(k, 0, size() - 2);
}

namespace {

// Gaps g_0, g_0/r, g_0/r^2, ... scaled to sum to `length`.
std::vector<double> geometric_gaps(Index count, double ratio, double length) {
  std::vector<double> gaps(count);
  double g = 1, sum = 0;
  for (Index k = 0; k < count; ++k) {
    gaps[k] = g;
    sum += g;
    g /= ratio;
  }
  for (double& x : gaps) x *= length / sum;
  return gaps;
}

Vec from_gaps(double lo, double hi, const std::vector<double>& gaps) {
  Vec x(Index(gaps.size()) + 1);
  x(0) = lo;
  double acc = lo;
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    acc += gaps[k];
    x(Index(k) + 1) = acc;
  }
  x(x.size() - 1) = hi;
  return x;
}

}  // namespace

Grid make_graded_grid(Interval domain, Index n, Grading grading) {
  if (n < 2) throw ParameterError("make_graded_grid: need n >= 2");
  if (!(domain.hi > domain.lo)) throw ParameterError("make_graded_grid: empty domain");
  Grid g{Vec(n), domain, grading};
  const double len = domain.length();
  if (grading.kind == Grading::Kind::uniform) {
    for (Index i = 0; i < n; ++i) g.nodes(i) = domain.lo + len * double(i) / double(n - 1);
    g.nodes(n - 1) = domain.hi;
    return g;
  }
  if (!(grading.ratio > 0 && grading.ratio < 1)) {
    throw ParameterError("make_graded_grid: geometric ratio must lie in (0,1)");
  }
  const Index gaps = n - 1;
  std::vector<double> seq;
  switch (grading.cluster) {
    case Cluster::left:
      seq = geometric_gaps(gaps, grading.ratio, len);
      break;
    case Cluster::right:
      seq = geometric_gaps(gaps, grading.ratio, len);
      std::reverse(seq.begin(), seq.end());
      break;
    case Cluster::both: {
      // Mirror-symmetric gap sequence; an odd gap count gets one middle gap.
      const Index half = gaps / 2;
      std::vector<double> h(half);
      double g0 = 1, sum = 0;
      for (Index k = 0; k < half; ++k) {
        h[k] = g0;
        sum += 2 * g0;
        g0 /= grading.ratio;
      }
      const double mid = (gaps % 2) ? g0 : 0.0;
      sum += mid;
      for (double& x : h) x *= len / sum;
      seq = h;
      if (gaps % 2) seq.push_back(mid * len / sum);
      seq.insert(seq.end(), h.rbegin(), h.rend());
      break;
    }
  }
  g.nodes = from_gaps(domain.lo, domain.hi, seq);
  for (Index i = 0; i + 1 < n; ++i) {
    if (!(g.nodes(i + 1) > g.nodes(i))) throw ParameterError("make_graded_grid: degenerate grading, nodes collapse");
  }
  return g;
}

Grid make_stretched_grid(Interval domain, double first_gap, double ratio, double max_gap) {
  if (!(ratio > 0 && ratio < 1) || !(first_gap > 0) || !(max_gap >= first_gap)) {
    throw ParameterError("make_stretched_grid: bad spacing parameters");
  }
  std::vector<double> x{domain.lo};
  double g = first_gap;
  while (x.back() + g < domain.hi - 0.5 * std::min(g, max_gap)) {
    x.push_back(x.back() + g);
    g = std::min(g / ratio, max_gap);
  }
  x.push_back(domain.hi);
  Grid grid{Eigen::Map<Vec>(x.data(), Index(x.size())), domain,
            Grading::geometric(ratio, Cluster::left)};
  return grid;
}

}  // namespace stickygraph
