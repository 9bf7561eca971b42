#include "distcomp/race.hpp"

#include <cmath>
#include <limits>

namespace distcomp {

TimeGrid TimeGrid::from_x_grid(Grid g) {
  TimeGrid tg{std::move(g), Vector()};
  tg.t_points.resize(tg.x_grid.size());
  tg.t_points(0) = std::numeric_limits<double>::infinity();
  for (Index i = 1; i < tg.x_grid.size(); ++i) {
    double x = tg.x_grid.point(i);
    tg.t_points(i) = (1.0 - x) / x;
  }
  return tg;
}

Index TimeGrid::node_of_time(double t) const {
  if (std::isinf(t)) return 0;
  for (Index i = 1; i < t_points.size(); ++i) {
    double ti = t_points(i);
    if (std::abs(ti - t) <= 1e-9 * (1.0 + std::abs(ti))) return i;
  }
  throw InvalidInput("TimeGrid: t is not a grid time");
}

double RaceSpec::payoff_at(Index i) const {
  if (i == 0) return 0.0;  // t = infinity pays nothing
  double x = grid.x_grid.point(i);
  if (mode == RaceMode::rd) return std::exp(-discount * grid.t_points(i));
  return margin * demand(x);
}

Vector RaceSpec::payoff_vector() const {
  Vector v(grid.x_grid.size());
  for (Index i = 0; i < v.size(); ++i) v(i) = payoff_at(i);
  return v;
}

PrizeSpec RaceSpec::prize_spec() const {
  return PrizeSpec::scaled_wta(n, payoff_vector());
}

namespace {

void require_race_shape(const RaceSpec& spec) {
  if (spec.n < 2) throw InvalidInput("race: n >= 2 required");
  if (spec.cost.kind() != CostKind::tail_local)
    throw InvalidInput("race: tail-local cost required");
  if (spec.mode == RaceMode::rd) {
    if (!(spec.discount > 0.0)) throw InvalidInput("race: discount must be > 0");
  } else {
    if (!(spec.margin > 0.0)) throw InvalidInput("race: margin must be > 0");
    if (!spec.demand.valid()) throw InvalidInput("race: demand function required");
    if (std::abs(spec.demand(0.0)) > 1e-12)
      throw AssumptionViolated("race: D(0) must be 0");
    double prev = 0.0;
    for (int k = 1; k <= 100; ++k) {
      double d = spec.demand(k / 100.0);
      if (!(d > 0.0)) throw AssumptionViolated("race: D(q) > 0 required for q > 0");
      if (d < prev - 1e-12) throw AssumptionViolated("race: D must be nondecreasing");
      prev = d;
    }
  }
}

}  // namespace

double phi(const RaceSpec& spec, const GridDistribution& h, Index node) {
  if (node < 0 || node >= h.grid().size()) throw InvalidInput("phi: node off-grid");
  // 1 - H(t(x)) = P(T > t(x)) equals the mass strictly below x.
  double survive = h.cdf_left(node);
  return spec.payoff_at(node) * std::pow(survive, spec.n - 1) -
         spec.cost.marginal(h, node);
}

double v_tilde(const RaceSpec& spec, const GridDistribution& h, Index node) {
  if (node < 0 || node >= h.grid().size()) throw InvalidInput("v_tilde: node off-grid");
  const Index m = h.grid().size();
  // M_H > t(x_node) iff the opponents' max x-index lies strictly below node.
  double total = 0.0;
  double prev = 0.0;
  for (Index y = 0; y < node; ++y) {
    double cur = std::pow(h.cdf(y), spec.n - 1);
    total += (cur - prev) * spec.payoff_at(y);
    prev = cur;
  }
  (void)m;
  return total;
}

double aggregate_decomposition_check(const RaceSpec& spec, const GridDistribution& f,
                                     Index node) {
  PrizeSpec prize = spec.prize_spec();
  Vector a = planner_gradient(prize, f);
  double a_inf = a(0);  // the x = 0 node is t = infinity
  double survive = f.cdf_left(node);
  double rhs = a_inf + spec.payoff_at(node) * std::pow(survive, spec.n - 1) -
               v_tilde(spec, f, node);
  return std::abs(a(node) - rhs);
}

namespace {

RaceSolution run_race(const RaceSpec& spec, const SolverConfig& cfg) {
  require_race_shape(spec);
  CostValidation val = validate(spec.cost, spec.grid.x_grid, spec.pi_bar(), spec.eta1,
                                8, cfg.seed ^ 0x72616365ULL);
  if (!val.pass)
    throw AssumptionViolated("race: cost validation failed: " + val.violations.front());

  PrizeSpec prize = spec.prize_spec();
  SolveResult eq = solve_symmetric_equilibrium(prize, spec.cost, cfg, spec.grid.x_grid);
  SolveResult pl = solve_planner(prize, spec.cost, cfg, 1, spec.grid.x_grid);

  RaceSolution out{std::move(eq.dist), std::move(pl.dist), spec.grid};
  out.eq_report = eq.report;
  out.pl_report = pl.report;
  out.lambda_g = eq.report.lambda;
  out.lambda_p_bar = pl.report.lambda;
  Vector a_pl = planner_gradient(prize, out.pl_x, cfg);
  out.lambda_p = out.lambda_p_bar - a_pl(0);  // normalize by A_G(infinity)

  // F(t) >= G(t) on the time axis is exactly: the equilibrium x-law
  // first-order dominates the planner x-law.
  out.fosd = fosd_compare(out.eq_x, out.pl_x, 10.0 * cfg.kkt_tol);
  return out;
}

}  // namespace

double RaceSolution::time_cdf(const GridDistribution& d, Index i) const {
  return 1.0 - d.cdf_left(i);
}

RaceSolution solve_race(const RaceSpec& spec, const SolverConfig& cfg) {
  if (spec.mode != RaceMode::rd) throw InvalidInput("solve_race: rd mode expected");
  return run_race(spec, cfg);
}

RaceSolution quality_race(const RaceSpec& spec, const SolverConfig& cfg) {
  if (spec.mode != RaceMode::quality)
    throw InvalidInput("quality_race: quality mode expected");
  return run_race(spec, cfg);
}

}  // namespace distcomp
