#pragma once

#include "distcomp/solver.hpp"

namespace distcomp {

// Compactified time axis: the x-grid on [0,1] maps to t(x) = (1-x)/x with
// the x = 0 node standing for t = infinity (never finishing).
struct TimeGrid {
  Grid x_grid;
  Vector t_points;

  static TimeGrid from_x_grid(Grid g);
  // Node whose time equals t (within rtol); accepts infinity.
  Index node_of_time(double t) const;
};

enum class RaceMode { rd, quality };

// Minimum-time winner-take-all race (rd: V(t) = exp(-r t)) or price-free
// quality competition (quality: V_q(t) = m D(1/(1+t))). The cost must be
// tail-local with kernel in time coordinates.
struct RaceSpec {
  int n = 2;
  RaceMode mode = RaceMode::rd;
  double discount = 1.0;   // r > 0 (rd mode)
  double margin = 1.0;     // m > 0 (quality mode)
  ScalarFn demand;         // D, nondecreasing with D(0) = 0 (quality mode)
  CostModel cost;
  TimeGrid grid;
  double eta1 = 0.1;       // margin demanded from the cost validator

  // Winner payoff at a grid node: V(t(x)) or m D(x); 0 at the x = 0 node.
  double payoff_at(Index i) const;
  Vector payoff_vector() const;
  double pi_bar() const { return payoff_at(grid.x_grid.size() - 1); }
  PrizeSpec prize_spec() const;
};

struct RaceSolution {
  GridDistribution eq_x;   // equilibrium on the x-grid
  GridDistribution pl_x;   // planner optimum on the x-grid
  TimeGrid grid;
  double lambda_g = 0.0;
  double lambda_p_bar = 0.0;
  double lambda_p = 0.0;   // lambda_p_bar - A_G(infinity)
  OrderVerdict fosd;       // time-axis cdf comparison F >= G
  KKTReport eq_report, pl_report;

  // Time-axis cdf at node i: mass at times <= t(x_i).
  double time_cdf(const GridDistribution& d, Index i) const;
};

// Reduced-form net payoff V(t) (1 - H(t))^(n-1) - c_H(t); -c_inf at t = inf.
double phi(const RaceSpec& spec, const GridDistribution& h, Index node);

// E[V(M_H) 1{M_H > t}] with M_H the minimum of n-1 iid times; exact sums.
double v_tilde(const RaceSpec& spec, const GridDistribution& h, Index node);

// |A_F(t) - (A_F(inf) + V(t)(1 - F(t))^(n-1) - v_tilde)|, both sides
// computed independently; exact grid arithmetic keeps it at float level.
double aggregate_decomposition_check(const RaceSpec& spec, const GridDistribution& f,
                                     Index node);

// Equilibrium + planner solve with multiplier extraction and the time-axis
// FOSD comparison. AssumptionViolated when the cost fails validation
// (including the tail normalization and the time-coordinate Inada margin).
RaceSolution solve_race(const RaceSpec& spec, const SolverConfig& cfg);

// Same pipeline under the quality payoff; the fosd verdict then reads as
// stochastic overprovision of quality via q = 1/(1+t).
RaceSolution quality_race(const RaceSpec& spec, const SolverConfig& cfg);

}  // namespace distcomp
