#pragma once

#include <Eigen/Dense>
#include <string>

namespace stickygraph {

using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Cluster { left, right, both };

struct Grading {
  enum class Kind { uniform, geometric };
  Kind kind = Kind::uniform;
  // Ratio between consecutive gaps moving toward the cluster point, in (0,1).
  double ratio = 1.0;
  Cluster cluster = Cluster::left;

  static Grading uniform() { return {}; }
  static Grading geometric(double ratio, Cluster c) { return {Kind::geometric, ratio, c}; }
};

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Strictly increasing nodes whose first and last entries are the domain ends.
struct Grid {
  Vec nodes;
  Interval domain;
  Grading grading;

  Index size() const { return nodes.size(); }
  double operator[](Index i) const { return nodes(i); }
  double min_gap() const;
  /// Index k with nodes[k] <= x < nodes[k+1], clamped to [0, size-2].
  Index locate(double x) const;
};

Grid make_graded_grid(Interval domain, Index n, Grading grading);

/// Geometric grid on [lo,hi] whose gaps grow away from lo, starting from
/// first_gap, with growth factor 1/ratio until the gap reaches max_gap.
Grid make_stretched_grid(Interval domain, double first_gap, double ratio, double max_gap);

}  // namespace stickygraph
