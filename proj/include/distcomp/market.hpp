#pragma once

#include "distcomp/solver.hpp"

#include <vector>

namespace distcomp {

// Taste-shock density on [0,1], tabulated on a uniform grid and integrating
// to one (tolerance 1e-8).
class TasteDensity {
 public:
  TasteDensity(Vector values);  // samples on a uniform grid over [0,1]
  static TasteDensity uniform(int nodes = 201);

  Index nodes() const { return g_.size(); }
  double point(Index i) const { return static_cast<double>(i) / (g_.size() - 1); }
  double density(Index i) const { return g_(i); }
  // Cdf by trapezoid accumulation, clamped to [0,1].
  double cdf(double e) const;

 private:
  Vector g_;
  Vector cum_;
};

struct MarketSpec {
  int n = 2;
  double sigma = 0.5;       // strictly inside (0,1)
  TasteDensity taste = TasteDensity::uniform();
  CostModel cost;
  double p_max = 2.0;
  Grid grid;

  void check() const;
};

// Smoothed effective-quality law Q_hat = (1-sigma) Q + sigma eps on a
// refined z-grid; F_hat is absolutely continuous by construction.
struct Convolution {
  Vector z;
  Vector cdf;      // F_hat samples
  Vector density;  // f_hat samples
  double cdf_at(double zq) const;  // linear interpolation, 0 below, 1 above
};

Convolution convolve_hat(const GridDistribution& f, double sigma,
                         const TasteDensity& taste, int refine = 4);

// omega(q) = int (F_hat((1-sigma) q + sigma e + r_shift))^(n-1) dG(e):
// the win probability of a deviator at quality q posting p - r_shift.
double omega(double q, const Convolution& conv, double sigma,
             const TasteDensity& taste, int n, double r_shift = 0.0);

// First-order-condition price 1 / (n (n-1) int F_hat^(n-2) f_hat^2 dz).
// NumericalFailure when the density integral degenerates.
double price_foc(const Convolution& conv, int n);

struct MarketEquilibrium {
  GridDistribution quality;
  Convolution conv;
  double price = 0.0;
  double lambda_g = 0.0;
  KKTReport kkt;
  double q_lo = 0.0, q_hi = 0.0;   // support endpoints at support_eps
  double omega_gap = 0.0;          // omega(q_hi) - omega(q_lo)
  double cost_gap = 0.0;           // c_F(q_hi) - c_F(q_lo)
  double price_dev_gap = 0.0;      // best scanned joint deviation minus value
  bool converged = false;
  int iterations = 0;
};

// Alternates the distributional best response (damped) with the explicit
// price FOC until both certificates close; then scans a 101-point deviation
// price grid, re-optimizing the distribution at each price, to probe for
// profitable joint deviations. AssumptionViolated when the price leaves the
// interior of [0, p_max].
MarketEquilibrium solve_market(const MarketSpec& spec, const SolverConfig& cfg);

struct LimitRow {
  int n = 0;
  double price = 0.0;
  double lambda_g = 0.0;
  double cost_gap = 0.0;
  double q_lo = 0.0, q_hi = 0.0;
  double kkt_sup = 0.0;
  double price_dev_gap = 0.0;
  bool steep_ok = true;  // support span <= cost_gap / steepness + tolerance
  bool converged = false;
};

// Solves the market for each n (ascending); rows keep input order. The
// steepness column is evaluated only when the cost declares a constant.
std::vector<LimitRow> limit_sweep(const MarketSpec& base, const std::vector<int>& n_list,
                                  const SolverConfig& cfg, int threads = 1);

}  // namespace distcomp
