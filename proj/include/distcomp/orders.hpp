#pragma once

#include "distcomp/grid.hpp"

#include <optional>
#include <vector>

namespace distcomp {

enum class Relation { dominates, dominated_by, equal, incomparable };

const char* to_string(Relation r);

// Outcome of a stochastic-order comparison. For incomparable pairs the
// witness records a location (grid point or quantile) where the ordering
// fails; max_violation is the smallest amount by which either one-sided
// ordering is broken, so a verdict is robust when it exceeds the tolerance
// by a wide margin.
struct OrderVerdict {
  Relation relation = Relation::incomparable;
  std::optional<double> witness;
  double max_violation = 0.0;
};

// First-order stochastic dominance, first-argument-centric: `dominates`
// means F's cdf lies below G's (pointwise, within tol). Grids must match.
OrderVerdict fosd_compare(const GridDistribution& f, const GridDistribution& g,
                          double tol = 1e-8);

// Convex order from quantile samples on a shared uniform q-grid over [0,1].
// `dominates` means the law of q_hi dominates the law of q_lo in the convex
// order: H(p) = int_0^p (q_hi - q_lo) dq <= tol for all p and |H(1)| <= tol.
OrderVerdict convex_order_compare(const Vector& q_lo, const Vector& q_hi,
                                  double tol = 1e-6);

// Increasing convex order via integrated survival functions (exact Stieltjes
// sums on the grid), first-argument-centric: `dominates` means
// int_x^1 (1-F) >= int_x^1 (1-G) - tol for every grid x.
OrderVerdict icx_compare(const GridDistribution& f, const GridDistribution& g,
                         double tol = 1e-6);

// Integrated survival int_{x_i}^1 (1 - F(u)) du at every node.
Vector integrated_survival(const GridDistribution& f);

// Levy metric between two cdfs on a common grid.
double levy_distance(const GridDistribution& f, const GridDistribution& g);

// Ordered rank prizes v1 >= ... >= vn = 0 with unit total.
class PrizeVector {
 public:
  explicit PrizeVector(Vector v);
  static PrizeVector winner_take_all(Index n);

  Index size() const { return v_.size(); }
  double prize(Index k) const { return v_(k); }  // 0-based rank
  const Vector& values() const { return v_; }

 private:
  Vector v_;
};

bool majorizes(const PrizeVector& w, const PrizeVector& v);

// One reverse Pigou-Dalton transfer: move `amount` from the poorer rank
// `from_rank` to the richer rank `to_rank` (1-based, to_rank < from_rank).
struct Transfer {
  int to_rank;
  int from_rank;
  double amount;
};

// Decomposes a majorization step v -> w into reverse Pigou-Dalton transfers
// (greedy, largest deficit index first). Applying them in order reproduces w
// within 1e-12. AssumptionViolated unless w majorizes v.
std::vector<Transfer> pigou_dalton_path(const PrizeVector& v, const PrizeVector& w);

}  // namespace distcomp
