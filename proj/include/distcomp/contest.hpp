#pragma once

#include "distcomp/cost.hpp"
#include "distcomp/orders.hpp"

#include <vector>

namespace distcomp {

// Rank-order contest with separable costs (closed-form equilibria) or local
// costs (entry analysis).
struct ContestSpec {
  int n = 2;
  PrizeVector prizes;
  CostModel cost;
};

// Expected prize of a player sitting at quantile q of the common atomless
// equilibrium distribution.
double psi(double q, const PrizeVector& v);

// Quadrature of int_0^1 psi(q; v) dq (composite Simpson, nodes >= 101);
// equals 1/n for every valid prize vector.
double psi_mean_check(const PrizeVector& v, int nodes);

struct ContestEquilibrium {
  GridDistribution dist;
  double support_upper = 1.0;  // x_bar
  double lambda = 0.0;
  Vector g_samples;            // psi - beta on the q-grid used for inversion
  bool support_reaches_one = false;
};

// Unique symmetric equilibrium under a separable cost: F(x) = g^{-1}(gamma(x))
// up to the x_bar solving gamma(x_bar) = v_1 - beta(1), with g = psi - beta
// inverted by bisection. AssumptionViolated when v_1 = v_2, g is not strictly
// increasing on a 1001-point q-grid, or gamma's range is too small.
ContestEquilibrium solve_closed_form(const ContestSpec& spec, const Grid& grid);

struct IcxCheck {
  ContestEquilibrium eq_lo;       // under v
  ContestEquilibrium eq_hi;       // under w (majorizing)
  OrderVerdict quantile_cx;       // convex order of (g_v, g_w) samples
  OrderVerdict icx;               // icx order of the equilibrium outputs
  double crossing_q = 0.0;        // sign change of g_w - g_v (neg -> pos)
  int sign_changes = 0;
  double mean_lo = 0.0;           // E gamma(X) = int g_v dq
  double mean_hi = 0.0;           // E gamma(Y) = int g_w dq
  double quantile_identity_err = 0.0;  // sup_q |gamma(Q_F(q)) - g(q)|
};

// Prize-inequality comparative statics: solves both closed forms and checks
// the convex order of the gamma-quantile functions and the icx order of the
// outputs. Both specs must share n and the separable cost; w must majorize v.
IcxCheck icx_theorem_check(const ContestSpec& spec_v, const ContestSpec& spec_w,
                           const Grid& grid);

// Winner-take-all entry analysis: the equilibrium quantile solves
// kappa(x, q) = q^(n-1); bisection to 1e-12. AssumptionViolated when
// kappa(1, q) < q^(n-1).
double entry_quantile(const CostModel& local_cost, int n, double q);

struct EntrySweep {
  std::vector<int> n_list;
  std::vector<GridDistribution> dists;
  // verdicts[k] compares dists[k] against dists[k+1]; `dominates` means the
  // smaller contest produces FOSD-higher output.
  std::vector<OrderVerdict> verdicts;
};

EntrySweep entry_sweep(const CostModel& local_cost, const std::vector<int>& n_list,
                       const Grid& grid, int q_nodes = 8193);

}  // namespace distcomp
