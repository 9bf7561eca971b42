#include "distcomp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace distcomp {

PrizeSpec PrizeSpec::rank_order(int n, PrizeVector v) {
  if (n < 2) throw InvalidInput("PrizeSpec: n >= 2 required");
  if (v.size() != n) throw InvalidInput("PrizeSpec: prize vector length != n");
  PrizeSpec s;
  s.kind_ = Kind::rank_order;
  s.n_ = n;
  s.v_ = std::move(v);
  return s;
}

PrizeSpec PrizeSpec::scaled_wta(int n, Vector payoff_per_node) {
  if (n < 2) throw InvalidInput("PrizeSpec: n >= 2 required");
  PrizeSpec s;
  s.kind_ = Kind::scaled_wta;
  s.n_ = n;
  s.payoff_ = std::move(payoff_per_node);
  for (Index i = 0; i < s.payoff_.size(); ++i)
    if (s.payoff_(i) < 0.0) throw InvalidInput("PrizeSpec: negative payoff");
  return s;
}

PrizeSpec PrizeSpec::custom(
    int n, std::function<double(double, const std::vector<double>&)> expost,
    std::function<double(const std::vector<double>&)> aggregate) {
  if (n < 2) throw InvalidInput("PrizeSpec: n >= 2 required");
  if (!expost) throw InvalidInput("PrizeSpec: custom prize needs an ex-post oracle");
  PrizeSpec s;
  s.kind_ = Kind::custom;
  s.n_ = n;
  s.expost_ = std::move(expost);
  s.aggregate_ = std::move(aggregate);
  return s;
}

const PrizeVector& PrizeSpec::prizes() const {
  if (!v_) throw InvalidInput("PrizeSpec: not a rank-order prize");
  return *v_;
}

double PrizeSpec::pi_bar() const {
  switch (kind_) {
    case Kind::rank_order: return v_->prize(0);
    case Kind::scaled_wta: return payoff_.size() ? payoff_.maxCoeff() : 0.0;
    case Kind::custom: return 1.0;  // payoffs are assumed normalized to [0,1]
  }
  return 1.0;
}

bool PrizeSpec::has_aggregate() const {
  return kind_ != Kind::custom || static_cast<bool>(aggregate_);
}

void SolverConfig::check() const {
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidInput("damping outside (0,1]");
  if (kkt_tol <= 0.0 || support_eps <= 0.0) throw InvalidInput("tolerances must be > 0");
  if (max_iter < 1 || inner_iter < 1) throw InvalidInput("iteration budgets must be >= 1");
  if (mean_constraint && (*mean_constraint < 0.0 || *mean_constraint > 1.0))
    throw InvalidInput("mean constraint outside [0,1]");
}

namespace {

// Win probability with a t-way uniform tie split:
//   sum_t C(n-1,t) pe^t pb^(n-1-t) / (t+1) = ((pb+pe)^n - pb^n) / (n pe).
double tie_aware_win_prob(double p_below, double p_equal, int n) {
  if (p_equal <= 1e-9) {
    double base = std::pow(p_below, n - 1);
    return base + 0.5 * (n - 1) *
                      (p_below > 0.0 ? std::pow(p_below, n - 2) : (n == 2 ? 1.0 : 0.0)) *
                      p_equal;
  }
  return (std::pow(p_below + p_equal, n) - std::pow(p_below, n)) /
         (static_cast<double>(n) * p_equal);
}

// Exact interim prize of a rank-order contest at one node: condition on b
// opponents strictly below and t tied; the t+1 tied players share the
// prizes of ranks a+1..a+t+1 (a strictly above) uniformly.
double rank_order_interim(const PrizeVector& v, int n, double p_below, double p_equal,
                          double p_above) {
  std::vector<double> fact(n + 1, 1.0);
  for (int k = 1; k <= n; ++k) fact[k] = fact[k - 1] * k;
  // Prefix sums of prizes for the shared-rank average.
  std::vector<double> pre(n + 1, 0.0);
  for (int k = 0; k < n; ++k) pre[k + 1] = pre[k] + v.prize(k);
  double total = 0.0;
  for (int b = 0; b <= n - 1; ++b) {
    double pb = std::pow(p_below, b);
    if (pb == 0.0 && b > 0) continue;
    for (int t = 0; t + b <= n - 1; ++t) {
      int a = n - 1 - b - t;
      double prob = fact[n - 1] / (fact[b] * fact[t] * fact[a]) * pb *
                    std::pow(p_equal, t) * std::pow(p_above, a);
      if (prob == 0.0) continue;
      double share = (pre[a + t + 1] - pre[a]) / static_cast<double>(t + 1);
      total += prob * share;
    }
  }
  return total;
}

struct NodeSampler {
  const GridDistribution& f;
  Index sample(Rng& rng) const {
    double u = rng.uniform();
    const Vector& cum = f.cdf();
    const double* begin = cum.data();
    const double* end = begin + cum.size();
    auto it = std::lower_bound(begin, end, u);
    Index i = static_cast<Index>(it - begin);
    return std::min(i, cum.size() - 1);
  }
};

std::uint64_t node_seed(std::uint64_t seed, Index i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Vector interim_prize(const PrizeSpec& spec, const GridDistribution& f,
                     const SolverConfig& cfg) {
  const Index m = f.grid().size();
  const int n = spec.players();
  Vector a(m);
  switch (spec.kind()) {
    case PrizeSpec::Kind::rank_order: {
      for (Index i = 0; i < m; ++i) {
        double pb = f.cdf_left(i);
        double pe = f.weight(i);
        double pa = std::max(0.0, 1.0 - f.cdf(i));
        a(i) = rank_order_interim(spec.prizes(), n, pb, pe, pa);
      }
      break;
    }
    case PrizeSpec::Kind::scaled_wta: {
      if (spec.payoff().size() != m)
        throw InvalidInput("interim_prize: payoff vector does not match grid");
      for (Index i = 0; i < m; ++i)
        a(i) = spec.payoff()(i) * tie_aware_win_prob(f.cdf_left(i), f.weight(i), n);
      break;
    }
    case PrizeSpec::Kind::custom: {
      NodeSampler sampler{f};
      double worst_se = 0.0;
      for (Index i = 0; i < m; ++i) {
        Rng rng(node_seed(cfg.seed, i));
        std::vector<double> opp(n - 1);
        double sum = 0.0, sumsq = 0.0;
        for (int trial = 0; trial < cfg.mc_trials; ++trial) {
          for (int j = 0; j < n - 1; ++j)
            opp[j] = f.grid().point(sampler.sample(rng));
          double val = spec.expost()(f.grid().point(i), opp);
          sum += val;
          sumsq += val * val;
        }
        double mean = sum / cfg.mc_trials;
        double var = std::max(0.0, sumsq / cfg.mc_trials - mean * mean);
        worst_se = std::max(worst_se, std::sqrt(var / cfg.mc_trials));
        a(i) = mean;
      }
      if (worst_se > cfg.kkt_tol / 10.0)
        throw NumericalFailure("interim_prize: Monte Carlo standard error too large");
      break;
    }
  }
  return a;
}

Vector planner_gradient(const PrizeSpec& spec, const GridDistribution& f,
                        const SolverConfig& cfg) {
  const Index m = f.grid().size();
  const int n = spec.players();
  Vector a(m);
  switch (spec.kind()) {
    case PrizeSpec::Kind::rank_order:
      a.setOnes();  // the total prize is constant
      break;
    case PrizeSpec::Kind::scaled_wta: {
      if (spec.payoff().size() != m)
        throw InvalidInput("planner_gradient: payoff vector does not match grid");
      // Law of the opponents' maximum node index, then
      // A(i) = payoff(i) P(max <= i) + sum_{y > i} P(max = y) payoff(y).
      Vector pmax(m);
      double prev = 0.0;
      for (Index y = 0; y < m; ++y) {
        double cur = std::pow(f.cdf(y), n - 1);
        pmax(y) = cur - prev;
        prev = cur;
      }
      double suffix = 0.0;
      for (Index i = m - 1; i >= 0; --i) {
        a(i) = spec.payoff()(i) * std::pow(f.cdf(i), n - 1) + suffix;
        suffix += pmax(i) * spec.payoff()(i);
      }
      break;
    }
    case PrizeSpec::Kind::custom: {
      if (!spec.has_aggregate())
        throw InvalidInput("planner_gradient: custom prize lacks an aggregate");
      NodeSampler sampler{f};
      for (Index i = 0; i < m; ++i) {
        Rng rng(node_seed(cfg.seed ^ 0x5bf0a8b1ULL, i));
        std::vector<double> profile(n);
        profile[0] = f.grid().point(i);
        double sum = 0.0;
        for (int trial = 0; trial < cfg.mc_trials; ++trial) {
          for (int j = 1; j < n; ++j) profile[j] = f.grid().point(sampler.sample(rng));
          sum += spec.aggregate()(profile);
        }
        a(i) = sum / cfg.mc_trials;
      }
      break;
    }
  }
  return a;
}

double aggregate_mean(const PrizeSpec& spec, const GridDistribution& f,
                      const SolverConfig& cfg) {
  const int n = spec.players();
  switch (spec.kind()) {
    case PrizeSpec::Kind::rank_order:
      return 1.0;
    case PrizeSpec::Kind::scaled_wta: {
      double total = 0.0, prev = 0.0;
      for (Index y = 0; y < f.grid().size(); ++y) {
        double cur = std::pow(f.cdf(y), n);
        total += (cur - prev) * spec.payoff()(y);
        prev = cur;
      }
      return total;
    }
    case PrizeSpec::Kind::custom: {
      if (!spec.has_aggregate())
        throw InvalidInput("aggregate_mean: custom prize lacks an aggregate");
      NodeSampler sampler{f};
      Rng rng(node_seed(cfg.seed ^ 0x2545f491ULL, 0));
      std::vector<double> profile(n);
      double sum = 0.0;
      for (int trial = 0; trial < cfg.mc_trials; ++trial) {
        for (int j = 0; j < n; ++j) profile[j] = f.grid().point(sampler.sample(rng));
        sum += spec.aggregate()(profile);
      }
      return sum / cfg.mc_trials;
    }
  }
  return 0.0;
}

KKTReport kkt_from_phi(const Vector& phi, const GridDistribution& f, double support_eps,
                       double kkt_tol) {
  KKTReport r;
  r.lambda = phi.dot(f.weights());
  r.sup_violation = phi.maxCoeff() - r.lambda;
  double gap = 0.0;
  for (Index i = 0; i < phi.size(); ++i)
    gap += std::max(0.0, r.lambda - phi(i)) * f.weight(i);
  r.comp_gap = gap;
  r.support = f.support(support_eps);
  r.converged = r.sup_violation <= kkt_tol && r.comp_gap <= kkt_tol;
  return r;
}

KKTReport kkt_residual(const PrizeSpec& spec, const GridDistribution& f,
                       const CostModel& cost, KktMode mode, const SolverConfig& cfg) {
  Vector gain = mode == KktMode::game ? interim_prize(spec, f, cfg)
                                      : planner_gradient(spec, f, cfg);
  Vector phi = gain - cost.kernel(f);
  return kkt_from_phi(phi, f, cfg.support_eps, cfg.kkt_tol);
}

namespace {

struct Vertex {
  Vector weights;
  double value;  // true maximum of the linear subproblem
};

// Linear subproblem over the simplex, or over the fixed-mean slice whose
// extreme points are single nodes at the mean and straddling two-point
// distributions. Among unconstrained vertices within tie_eps of the max the
// highest node is taken: escaping a tie upward is weakly profitable, and
// any vertex inside the stopping gap solves the subproblem to tolerance.
Vertex best_vertex(const Vector& g, const Grid& grid,
                   const std::optional<double>& mean, double tie_eps) {
  const Index m = g.size();
  Vertex best;
  best.value = -std::numeric_limits<double>::infinity();
  if (!mean) {
    double v = g.maxCoeff();
    Index i_star = m - 1;
    while (i_star > 0 && g(i_star) < v - tie_eps) --i_star;
    best.weights = Vector::Zero(m);
    best.weights(i_star) = 1.0;
    best.value = v;
    return best;
  }
  const double target = *mean;
  for (Index i = 0; i < m; ++i) {
    double xi = grid.point(i);
    if (std::abs(xi - target) <= 1e-14) {
      if (g(i) > best.value) {
        best.weights = Vector::Zero(m);
        best.weights(i) = 1.0;
        best.value = g(i);
      }
    }
    if (xi >= target) continue;
    for (Index j = m - 1; j > i; --j) {
      double xj = grid.point(j);
      if (xj <= target) break;
      double wj = (target - xi) / (xj - xi);
      double val = (1.0 - wj) * g(i) + wj * g(j);
      if (val > best.value) {
        best.weights = Vector::Zero(m);
        best.weights(i) = 1.0 - wj;
        best.weights(j) = wj;
        best.value = val;
      }
    }
  }
  if (!best.weights.size())
    throw InvalidInput("fixed-mean slice is empty for this grid");
  return best;
}

}  // namespace

InnerSolve maximize_linear_minus_cost(const Vector& a, const CostModel& cost,
                                      const GridDistribution& start,
                                      const SolverConfig& cfg, double gap_tol) {
  const Grid& grid = start.grid();
  GridDistribution h = start;
  double gap = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < cfg.inner_iter; ++it) {
    Vector g = a - cost.kernel(h);
    Vertex v = best_vertex(g, grid, cfg.mean_constraint, gap_tol);
    gap = v.value - g.dot(h.weights());
    if (gap <= gap_tol) break;
    GridDistribution e(grid, v.weights);
    // Exact line search: phi'(s) = (a - c_{H_s}) . (e - h), decreasing for
    // convex segment costs; bisect for the root, full step if still rising.
    Vector d = e.weights() - h.weights();
    auto slope = [&](double s) {
      GridDistribution hs = h.mix(e, s);
      return (a - cost.kernel(hs)).dot(d);
    };
    double step = 1.0;
    if (cost.kind() != CostKind::linear && slope(1.0) < 0.0) {
      double lo = 0.0, hi = 1.0;
      for (int b = 0; b < 30; ++b) {
        double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
      }
      step = 0.5 * (lo + hi);
    }
    h = h.mix(e, step);
  }
  return InnerSolve{std::move(h), gap, it};
}

GridDistribution best_response(const PrizeSpec& spec, const GridDistribution& f,
                               const CostModel& cost, const SolverConfig& cfg) {
  cfg.check();
  Vector a = interim_prize(spec, f, cfg);
  GridDistribution start = f;
  if (cfg.mean_constraint && std::abs(f.mean() - *cfg.mean_constraint) > 1e-12) {
    Vector w = Vector::Zero(f.grid().size());
    w(f.grid().size() - 1) = *cfg.mean_constraint;
    w(0) = 1.0 - *cfg.mean_constraint;
    start = GridDistribution(f.grid(), std::move(w));
  }
  InnerSolve inner = maximize_linear_minus_cost(a, cost, start, cfg, cfg.kkt_tol / 4.0);
  if (inner.gap > cfg.kkt_tol / 4.0)
    throw NoConvergence("best_response: Frank-Wolfe gap above threshold");
  return inner.dist;
}

namespace {

using GradientOracle = std::function<Vector(const GridDistribution&)>;

SolveResult damped_solve(const GradientOracle& oracle, const CostModel& cost,
                         const SolverConfig& cfg, GridDistribution f) {
  cfg.check();
  const Grid& grid = f.grid();
  // The raw damped iterate always carries a fresh tau-weight best response,
  // so the certified answer is usually a tail average: keep one over the
  // most recent dyadic window and certify it periodically alongside the
  // iterate, returning whichever candidate scores best.
  Vector avg_sum = Vector::Zero(grid.size());
  int avg_count = 0;
  int next_reset = 2;
  constexpr int kCheckEvery = 25;

  std::optional<SolveResult> best;
  auto offer = [&](GridDistribution cand, const Vector& phi, int iter) {
    KKTReport rep = kkt_from_phi(phi, cand, cfg.support_eps, cfg.kkt_tol);
    rep.iterations = iter;
    double score = std::max(rep.sup_violation, rep.comp_gap);
    if (!best || score < std::max(best->report.sup_violation, best->report.comp_gap))
      best = SolveResult{std::move(cand), rep};
    return rep.converged;
  };

  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    Vector a = oracle(f);
    if (offer(f, a - cost.kernel(f), iter)) break;
    if (iter % kCheckEvery == kCheckEvery - 1 && avg_count > 1) {
      GridDistribution avg(grid, Vector(avg_sum / avg_count));
      Vector phi = oracle(avg) - cost.kernel(avg);
      if (offer(std::move(avg), phi, iter)) break;
    }
    InnerSolve inner =
        maximize_linear_minus_cost(a, cost, f, cfg, cfg.kkt_tol / 4.0);
    f = f.mix(inner.dist, cfg.damping);
    if (iter + 1 == next_reset) {
      avg_sum.setZero();
      avg_count = 0;
      next_reset *= 2;
    }
    avg_sum += f.weights();
    ++avg_count;
  }
  if (!best->report.converged && avg_count > 1) {
    GridDistribution avg(grid, Vector(avg_sum / avg_count));
    Vector phi = oracle(avg) - cost.kernel(avg);
    offer(std::move(avg), phi, iter);
  }
  best->report.iterations = std::min(iter, cfg.max_iter);
  return std::move(*best);
}

GridDistribution default_start(const Grid& grid, const SolverConfig& cfg) {
  if (!cfg.mean_constraint) return GridDistribution::uniform_weights(grid);
  Vector w = Vector::Zero(grid.size());
  w(grid.size() - 1) = *cfg.mean_constraint;
  w(0) = 1.0 - *cfg.mean_constraint;
  return GridDistribution(grid, std::move(w));
}

}  // namespace

SolveResult solve_symmetric_equilibrium(const PrizeSpec& spec, const CostModel& cost,
                                        const SolverConfig& cfg, const Grid& grid,
                                        std::optional<GridDistribution> start) {
  GridDistribution f = start ? std::move(*start) : default_start(grid, cfg);
  auto oracle = [&](const GridDistribution& cur) { return interim_prize(spec, cur, cfg); };
  return damped_solve(oracle, cost, cfg, std::move(f));
}

SolveResult solve_planner(const PrizeSpec& spec, const CostModel& cost,
                          const SolverConfig& cfg, int restarts, const Grid& grid) {
  if (restarts < 1) throw InvalidInput("solve_planner: restarts >= 1 required");
  if (!spec.has_aggregate())
    throw InvalidInput("solve_planner: aggregate prize required");
  if (spec.kind() == PrizeSpec::Kind::custom) {
    // Spot-check aggregate symmetry on sampled profiles.
    Rng rng(cfg.seed ^ 0xa5a5a5a5ULL);
    for (int trial = 0; trial < 16; ++trial) {
      std::vector<double> prof(spec.players());
      for (auto& x : prof) x = rng.uniform();
      double base = spec.aggregate()(prof);
      std::vector<double> perm(prof.rbegin(), prof.rend());
      if (std::abs(spec.aggregate()(perm) - base) > 1e-9)
        throw AssumptionViolated("solve_planner: aggregate prize not symmetric");
    }
  }
  auto oracle = [&](const GridDistribution& cur) { return planner_gradient(spec, cur, cfg); };

  Rng rng(cfg.seed);
  std::optional<SolveResult> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    GridDistribution start =
        r == 0 ? default_start(grid, cfg) : random_distribution(grid, rng);
    SolveResult res = damped_solve(oracle, cost, cfg, std::move(start));
    double value = aggregate_mean(spec, res.dist, cfg) / spec.players() -
                   cost.evaluate_from_origin(res.dist);
    if (value > best_value) {
      best_value = value;
      best = std::move(res);
    }
  }
  return std::move(*best);
}

double atom_shift_gain(const PrizeSpec& spec, const GridDistribution& f,
                       const CostModel& cost, double alpha, const SolverConfig& cfg) {
  if (alpha < 0.0) throw InvalidInput("atom_shift_gain: alpha must be >= 0");
  if (alpha == 0.0) return 0.0;
  const Index top = f.grid().size() - 1;
  if (f.weight(top) < alpha - 1e-15)
    throw InvalidInput("atom_shift_gain: atom at 1 smaller than alpha");
  Vector w = f.weights();
  w(top) -= alpha;
  w(0) += alpha;
  GridDistribution shifted(f.grid(), std::move(w));
  Vector a = interim_prize(spec, f, cfg);
  double prize_change = alpha * (a(0) - a(top));
  double cost_change = cost.evaluate(shifted, f);
  return prize_change - cost_change;
}

}  // namespace distcomp
