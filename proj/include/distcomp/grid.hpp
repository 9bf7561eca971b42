#pragma once

#include "distcomp/types.hpp"

#include <optional>
#include <vector>

namespace distcomp {

// Finite ordered support for distributions over the performance index.
// Points are strictly increasing and always include both endpoints 0 and 1.
class Grid {
 public:
  Grid() : Grid(uniform(2)) {}  // placeholder, the trivial {0,1} grid
  explicit Grid(Vector points);
  static Grid uniform(Index m);

  Index size() const { return pts_.size(); }
  double point(Index i) const { return pts_(i); }
  const Vector& points() const { return pts_; }
  double max_step() const;

  // Index of the grid node equal to x (within atol), InvalidInput otherwise.
  Index index_of(double x, double atol = 1e-12) const;
  // Largest index with point <= x, or -1 when x < first point.
  Index floor_index(double x) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  Vector pts_;
};

// Probability measure supported on a Grid: nonnegative weights summing to
// one (tolerance 1e-12). The running-sum cdf is precomputed; all instances
// are immutable after construction.
class GridDistribution {
 public:
  GridDistribution(Grid grid, Vector weights);

  static GridDistribution point_mass(const Grid& g, Index node);
  static GridDistribution uniform_weights(const Grid& g);
  // Node weights from cdf values per node (first weight = cdf(0)).
  static GridDistribution from_cdf(const Grid& g, const Vector& cdf);

  const Grid& grid() const { return grid_; }
  const Vector& weights() const { return w_; }
  double weight(Index i) const { return w_(i); }
  // cdf at node i, F(x_i), including the atom at x_i.
  double cdf(Index i) const { return cum_(i); }
  const Vector& cdf() const { return cum_; }
  // Left limit F(x_i^-).
  double cdf_left(Index i) const { return cum_(i) - w_(i); }

  // F(x) = mass at grid points <= x. InvalidInput for x outside [0,1].
  double cdf_at(double x) const;
  // Generalized inverse inf{x : F(x) >= q}; q = 0 maps to the support
  // minimum. InvalidInput for q outside [0,1].
  double quantile(double q) const;

  double mean() const;
  // Largest weight at nodes strictly inside (0,1).
  double max_interior_atom() const;
  // Nodes carrying more than eps mass.
  std::vector<Index> support(double eps) const;

  // Convex mixture (1-s)*this + s*other; grids must match.
  GridDistribution mix(const GridDistribution& other, double s) const;

 private:
  Grid grid_;
  Vector w_;
  Vector cum_;
};

void require_same_grid(const GridDistribution& a, const GridDistribution& b);

}  // namespace distcomp
