#include "distcomp/grid.hpp"

#include <algorithm>
#include <cmath>

namespace distcomp {

namespace {
constexpr double kMassTol = 1e-12;
}

Grid::Grid(Vector points) : pts_(std::move(points)) {
  if (pts_.size() < 2) throw InvalidInput("Grid: need at least 2 points");
  if (pts_(0) != 0.0) throw InvalidInput("Grid: first point must be 0");
  if (pts_(pts_.size() - 1) != 1.0) throw InvalidInput("Grid: last point must be 1");
  for (Index i = 1; i < pts_.size(); ++i) {
    if (!(pts_(i) > pts_(i - 1)))
      throw InvalidInput("Grid: points must be strictly increasing");
  }
}

Grid Grid::uniform(Index m) {
  if (m < 2) throw InvalidInput("Grid::uniform: need m >= 2");
  Vector p(m);
  for (Index i = 0; i < m; ++i)
    p(i) = static_cast<double>(i) / static_cast<double>(m - 1);
  p(m - 1) = 1.0;
  return Grid(std::move(p));
}

double Grid::max_step() const {
  double h = 0.0;
  for (Index i = 1; i < pts_.size(); ++i) h = std::max(h, pts_(i) - pts_(i - 1));
  return h;
}

Index Grid::index_of(double x, double atol) const {
  Index lo = floor_index(x);
  for (Index i : {lo, lo + 1}) {
    if (i >= 0 && i < pts_.size() && std::abs(pts_(i) - x) <= atol) return i;
  }
  throw InvalidInput("Grid: x is not a grid point");
}

Index Grid::floor_index(double x) const {
  const double* begin = pts_.data();
  const double* end = begin + pts_.size();
  auto it = std::upper_bound(begin, end, x);
  return static_cast<Index>(it - begin) - 1;
}

bool Grid::operator==(const Grid& other) const {
  return pts_.size() == other.pts_.size() && pts_ == other.pts_;
}

GridDistribution::GridDistribution(Grid grid, Vector weights)
    : grid_(std::move(grid)), w_(std::move(weights)) {
  if (w_.size() != grid_.size())
    throw InvalidInput("GridDistribution: weights/grid size mismatch");
  double total = 0.0;
  for (Index i = 0; i < w_.size(); ++i) {
    if (w_(i) < 0.0) throw InvalidInput("GridDistribution: negative weight");
    total += w_(i);
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw InvalidInput("GridDistribution: weights must sum to 1");
  cum_.resize(w_.size());
  double run = 0.0;
  for (Index i = 0; i < w_.size(); ++i) {
    run += w_(i);
    cum_(i) = run;
  }
}

GridDistribution GridDistribution::point_mass(const Grid& g, Index node) {
  if (node < 0 || node >= g.size())
    throw InvalidInput("point_mass: node out of range");
  Vector w = Vector::Zero(g.size());
  w(node) = 1.0;
  return GridDistribution(g, std::move(w));
}

GridDistribution GridDistribution::uniform_weights(const Grid& g) {
  Vector w = Vector::Constant(g.size(), 1.0 / static_cast<double>(g.size()));
  return GridDistribution(g, std::move(w));
}

GridDistribution GridDistribution::from_cdf(const Grid& g, const Vector& cdf) {
  if (cdf.size() != g.size()) throw InvalidInput("from_cdf: size mismatch");
  Vector w(g.size());
  double prev = 0.0;
  for (Index i = 0; i < cdf.size(); ++i) {
    w(i) = cdf(i) - prev;
    if (w(i) < 0.0 && w(i) > -1e-14) w(i) = 0.0;  // float dust from differencing
    prev = cdf(i);
  }
  return GridDistribution(g, std::move(w));
}

double GridDistribution::cdf_at(double x) const {
  if (x < 0.0 || x > 1.0) throw InvalidInput("cdf_at: x outside [0,1]");
  Index i = grid_.floor_index(x);
  return i < 0 ? 0.0 : cum_(i);
}

double GridDistribution::quantile(double q) const {
  if (q < 0.0 || q > 1.0) throw InvalidInput("quantile: q outside [0,1]");
  if (q == 0.0) {
    for (Index i = 0; i < w_.size(); ++i)
      if (cum_(i) > 0.0) return grid_.point(i);
    return grid_.point(grid_.size() - 1);
  }
  for (Index i = 0; i < w_.size(); ++i)
    if (cum_(i) >= q) return grid_.point(i);
  return grid_.point(grid_.size() - 1);  // q above total mass by float dust
}

double GridDistribution::mean() const { return w_.dot(grid_.points()); }

double GridDistribution::max_interior_atom() const {
  double m = 0.0;
  for (Index i = 1; i + 1 < w_.size(); ++i) m = std::max(m, w_(i));
  return m;
}

std::vector<Index> GridDistribution::support(double eps) const {
  std::vector<Index> s;
  for (Index i = 0; i < w_.size(); ++i)
    if (w_(i) > eps) s.push_back(i);
  return s;
}

GridDistribution GridDistribution::mix(const GridDistribution& other, double s) const {
  require_same_grid(*this, other);
  if (s < 0.0 || s > 1.0) throw InvalidInput("mix: s outside [0,1]");
  Vector w = (1.0 - s) * w_ + s * other.w_;
  return GridDistribution(grid_, std::move(w));
}

void require_same_grid(const GridDistribution& a, const GridDistribution& b) {
  if (a.grid() != b.grid()) throw InvalidInput("distributions live on different grids");
}

}  // namespace distcomp
