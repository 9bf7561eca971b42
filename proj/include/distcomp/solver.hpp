#pragma once

#include "distcomp/cost.hpp"
#include "distcomp/orders.hpp"

#include <functional>
#include <optional>

namespace distcomp {

// Prize structure of the symmetric game. RankOrder covers contests with a
// full prize vector; ScaledWta covers the race-type games where the highest
// index wins a realization-dependent payoff; Custom supplies the ex-post
// prize (tie-averaged) directly and is evaluated by Monte Carlo.
class PrizeSpec {
 public:
  enum class Kind { rank_order, scaled_wta, custom };

  static PrizeSpec rank_order(int n, PrizeVector v);
  // payoff(i) = prize to the winner when the winning node is i.
  static PrizeSpec scaled_wta(int n, Vector payoff_per_node);
  static PrizeSpec custom(int n,
                          std::function<double(double, const std::vector<double>&)> expost,
                          std::function<double(const std::vector<double>&)> aggregate);

  Kind kind() const { return kind_; }
  int players() const { return n_; }
  const PrizeVector& prizes() const;
  const Vector& payoff() const { return payoff_; }
  double pi_bar() const;
  bool has_aggregate() const;

  const std::function<double(double, const std::vector<double>&)>& expost() const {
    return expost_;
  }
  const std::function<double(const std::vector<double>&)>& aggregate() const {
    return aggregate_;
  }

 private:
  Kind kind_ = Kind::rank_order;
  int n_ = 2;
  std::optional<PrizeVector> v_;
  Vector payoff_;
  std::function<double(double, const std::vector<double>&)> expost_;
  std::function<double(const std::vector<double>&)> aggregate_;
};

struct SolverConfig {
  double damping = 0.5;            // tau in (0,1]
  int max_iter = 2000;             // outer iterations
  double kkt_tol = 1e-3;
  int inner_iter = 2000;           // Frank-Wolfe budget per best response
  double support_eps = 1e-6;
  std::uint64_t seed = 0;
  std::optional<double> mean_constraint;
  int mc_trials = 20000;           // Custom prize Monte Carlo sample size

  void check() const;
};

// Certificate attached to every solve: lambda is the dF-average of the net
// marginal return Phi, sup_violation = max Phi - lambda (may be negative,
// slack), comp_gap = integral of (lambda - Phi)^+ dF. Both vanish exactly
// when Phi is constant on the support and maximal there.
struct KKTReport {
  double lambda = 0.0;
  double sup_violation = 0.0;
  double comp_gap = 0.0;
  std::vector<Index> support;
  bool converged = false;
  int iterations = 0;
};

enum class KktMode { game, planner };

// Interim expected prize a_F per grid node, ties handled exactly via the
// multinomial split for rank-order and scaled-WTA prizes; Monte Carlo with
// per-node seeding for Custom (NumericalFailure when the standard error
// exceeds kkt_tol/10).
Vector interim_prize(const PrizeSpec& spec, const GridDistribution& f,
                     const SolverConfig& cfg = {});

// Planner gradient A_F(x) = E[Pi(x, X_2, ..., X_n)], X_j iid dF.
Vector planner_gradient(const PrizeSpec& spec, const GridDistribution& f,
                        const SolverConfig& cfg = {});

// E[Pi(X_1,...,X_n)] under the symmetric profile.
double aggregate_mean(const PrizeSpec& spec, const GridDistribution& f,
                      const SolverConfig& cfg = {});

KKTReport kkt_from_phi(const Vector& phi, const GridDistribution& f,
                       double support_eps, double kkt_tol);

KKTReport kkt_residual(const PrizeSpec& spec, const GridDistribution& f,
                       const CostModel& cost, KktMode mode,
                       const SolverConfig& cfg = {});

struct InnerSolve {
  GridDistribution dist;
  double gap = 0.0;
  int iterations = 0;
};

// Frank-Wolfe over the grid simplex (or its fixed-mean slice) for the
// objective sum(a dH) - C(H), gradient a - c_H, vertex = best point mass
// (or mean-feasible two-point vertex), exact line search on the segment.
// Stops at gap <= gap_tol.
InnerSolve maximize_linear_minus_cost(const Vector& a, const CostModel& cost,
                                      const GridDistribution& start,
                                      const SolverConfig& cfg, double gap_tol);

// Best response to symmetric opponents f. Throws NoConvergence when the
// inner budget is exhausted with gap above kkt_tol/4.
GridDistribution best_response(const PrizeSpec& spec, const GridDistribution& f,
                               const CostModel& cost, const SolverConfig& cfg);

struct SolveResult {
  GridDistribution dist;
  KKTReport report;
};

// Damped iteration F <- (1-tau) F + tau BR(F), certified by the game KKT
// residual. The report is returned whether or not it converged.
SolveResult solve_symmetric_equilibrium(const PrizeSpec& spec, const CostModel& cost,
                                        const SolverConfig& cfg, const Grid& grid,
                                        std::optional<GridDistribution> start = {});

// Multistart ascent on the planner objective v(F) = E[Pi]/n - C(F) with
// gradient A_F - c_F; the certificate is stationarity (KKT), not global
// optimality. Reported lambda is the raw planner multiplier.
SolveResult solve_planner(const PrizeSpec& spec, const CostModel& cost,
                          const SolverConfig& cfg, int restarts,
                          const Grid& grid);

// Net payoff change from moving mass alpha from the top node to 0 against
// symmetric opponents f. InvalidInput when f carries less than alpha at 1.
double atom_shift_gain(const PrizeSpec& spec, const GridDistribution& f,
                       const CostModel& cost, double alpha,
                       const SolverConfig& cfg = {});

}  // namespace distcomp
