#include "distcomp/contest.hpp"

#include <algorithm>
#include <cmath>

namespace distcomp {

double psi(double q, const PrizeVector& v) {
  if (q < 0.0 || q > 1.0) throw InvalidInput("psi: q outside [0,1]");
  const int n = static_cast<int>(v.size());
  double total = 0.0;
  double binom = 1.0;  // C(n-1, k-1), updated multiplicatively over k
  for (int k = 1; k <= n; ++k) {
    total += binom * std::pow(q, n - k) * std::pow(1.0 - q, k - 1) * v.prize(k - 1);
    binom = binom * (n - k) / k;
  }
  return total;
}

double psi_mean_check(const PrizeVector& v, int nodes) {
  if (nodes < 101) throw InvalidInput("psi_mean_check: nodes >= 101 required");
  if (nodes % 2 == 0) ++nodes;  // Simpson needs an odd node count
  const double h = 1.0 / (nodes - 1);
  double acc = psi(0.0, v) + psi(1.0, v);
  for (int i = 1; i + 1 < nodes; ++i)
    acc += (i % 2 ? 4.0 : 2.0) * psi(i * h, v);
  return acc * h / 3.0;
}

namespace {

constexpr int kQGridSize = 1001;

// g(q) = psi(q; v) - beta(q) sampled on the uniform q-grid; checks strict
// increase (condition for the closed form).
Vector sample_g(const ContestSpec& spec) {
  Vector g(kQGridSize);
  for (int i = 0; i < kQGridSize; ++i) {
    double q = static_cast<double>(i) / (kQGridSize - 1);
    g(i) = psi(q, spec.prizes) - spec.cost.beta()(q);
  }
  for (int i = 1; i < kQGridSize; ++i)
    if (!(g(i) > g(i - 1)))
      throw AssumptionViolated("contest: psi - beta is not strictly increasing");
  return g;
}

double bisect_increasing(const std::function<double(double)>& f, double target,
                         double lo, double hi) {
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
    if (hi - lo < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

void require_contest_shape(const ContestSpec& spec) {
  if (spec.n < 2 || spec.prizes.size() != spec.n)
    throw InvalidInput("contest: prize vector must have length n >= 2");
  if (spec.cost.kind() != CostKind::separable)
    throw InvalidInput("contest: closed form needs a separable cost");
  if (!(spec.prizes.prize(0) > spec.prizes.prize(1)))
    throw AssumptionViolated("contest: v1 > v2 required");
}

}  // namespace

ContestEquilibrium solve_closed_form(const ContestSpec& spec, const Grid& grid) {
  require_contest_shape(spec);
  const ScalarFn& gamma = spec.cost.gamma();
  const ScalarFn& beta = spec.cost.beta();
  Vector g = sample_g(spec);

  auto g_of = [&](double q) { return psi(q, spec.prizes) - beta(q); };
  auto g_inv = [&](double y) {
    return bisect_increasing(g_of, y, 0.0, 1.0);
  };

  const double g_top = spec.prizes.prize(0) - beta(1.0);  // g(1)
  if (gamma(1.0) < g_top - 1e-12)
    throw AssumptionViolated("contest: gamma range too small for the support bound");
  double x_bar =
      bisect_increasing([&](double x) { return gamma(x); }, g_top, 0.0, 1.0);

  // Midpoint binning: interior node k carries the continuum cdf half a cell
  // up, so the tie-aware mid-cdf F(x-) + w/2 reproduces the continuum
  // indifference condition to second order and the residual multiplier
  // stays near 0. The boundary nodes keep F(0) = 0 and F(1) = 1 exactly.
  Vector cdf(grid.size());
  cdf(0) = 0.0;
  for (Index i = 1; i + 1 < grid.size(); ++i) {
    double x = grid.point(i) + 0.5 * (grid.point(i + 1) - grid.point(i));
    cdf(i) = x >= x_bar ? 1.0 : std::clamp(g_inv(gamma(x)), 0.0, 1.0);
    cdf(i) = std::max(cdf(i), cdf(i - 1));
  }
  cdf(grid.size() - 1) = 1.0;

  ContestEquilibrium eq{GridDistribution::from_cdf(grid, cdf), x_bar, 0.0,
                        std::move(g), x_bar >= 1.0 - 1e-12};
  return eq;
}

IcxCheck icx_theorem_check(const ContestSpec& spec_v, const ContestSpec& spec_w,
                           const Grid& grid) {
  if (spec_v.n != spec_w.n) throw InvalidInput("icx_theorem_check: n mismatch");
  if (!majorizes(spec_w.prizes, spec_v.prizes))
    throw AssumptionViolated("icx_theorem_check: w must majorize v");

  IcxCheck out{solve_closed_form(spec_v, grid), solve_closed_form(spec_w, grid)};

  // Single-crossing diagnostics for g_w - g_v on the q-grid.
  const Vector& gv = out.eq_lo.g_samples;
  const Vector& gw = out.eq_hi.g_samples;
  int prev_sign = 0;
  for (Index i = 0; i < gv.size(); ++i) {
    double d = gw(i) - gv(i);
    int sign = d > 1e-12 ? 1 : (d < -1e-12 ? -1 : 0);
    if (sign != 0 && prev_sign != 0 && sign != prev_sign) {
      ++out.sign_changes;
      out.crossing_q = static_cast<double>(i) / (gv.size() - 1);
    }
    if (sign != 0) prev_sign = sign;
  }

  out.quantile_cx = convex_order_compare(gv, gw, 1e-6);
  // Distribution-level tolerance: one grid step absorbs the right-edge
  // binning error of the staircase survival integrals.
  out.icx = icx_compare(out.eq_hi.dist, out.eq_lo.dist, grid.max_step());

  // Quantile-domain means: E gamma(X) = int_0^1 g(q) dq, Simpson.
  auto simpson = [](const Vector& y) {
    double acc = y(0) + y(y.size() - 1);
    for (Index i = 1; i + 1 < y.size(); ++i) acc += (i % 2 ? 4.0 : 2.0) * y(i);
    return acc / (3.0 * (y.size() - 1));
  };
  out.mean_lo = simpson(gv);
  out.mean_hi = simpson(gw);

  // Identity check: gamma evaluated at the equilibrium quantile recovers g.
  double err = 0.0;
  for (int k = 1; k < 100; ++k) {
    double q = k / 100.0;
    err = std::max(err, std::abs(spec_v.cost.gamma()(out.eq_lo.dist.quantile(q)) -
                                 (psi(q, spec_v.prizes) - spec_v.cost.beta()(q))));
  }
  out.quantile_identity_err = err;
  return out;
}

double entry_quantile(const CostModel& local_cost, int n, double q) {
  if (local_cost.kind() != CostKind::local)
    throw InvalidInput("entry_quantile: local cost kind required");
  if (q < 0.0 || q > 1.0) throw InvalidInput("entry_quantile: q outside [0,1]");
  if (n < 2) throw InvalidInput("entry_quantile: n >= 2 required");
  const double target = std::pow(q, n - 1);
  const auto& kappa = local_cost.kappa();
  if (kappa(1.0, q) < target)
    throw AssumptionViolated("entry_quantile: kappa(1,q) below q^(n-1), no root");
  if (kappa(0.0, q) >= target) return 0.0;
  return bisect_increasing([&](double x) { return kappa(x, q); }, target, 0.0, 1.0);
}

EntrySweep entry_sweep(const CostModel& local_cost, const std::vector<int>& n_list,
                       const Grid& grid, int q_nodes) {
  if (n_list.empty()) throw InvalidInput("entry_sweep: empty n list");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 2 || (k > 0 && n_list[k] <= n_list[k - 1]))
      throw InvalidInput("entry_sweep: n_list must be ascending, entries >= 2");
  }
  if (q_nodes < 3) throw InvalidInput("entry_sweep: q_nodes too small");

  EntrySweep out;
  out.n_list = n_list;
  for (int n : n_list) {
    Vector qx(q_nodes);
    for (int j = 0; j < q_nodes; ++j)
      qx(j) = entry_quantile(local_cost, n, static_cast<double>(j) / (q_nodes - 1));
    // Invert the sampled quantile function onto the grid.
    Vector cdf(grid.size());
    Index j = 0;
    for (Index i = 0; i < grid.size(); ++i) {
      double x = grid.point(i);
      while (j + 1 < q_nodes && qx(j + 1) <= x) ++j;
      if (j + 1 >= q_nodes || x >= qx(q_nodes - 1)) {
        cdf(i) = 1.0;
      } else if (x < qx(0)) {
        cdf(i) = 0.0;
      } else {
        double dq = 1.0 / (q_nodes - 1);
        double seg = qx(j + 1) - qx(j);
        double frac = seg > 0.0 ? (x - qx(j)) / seg : 1.0;
        cdf(i) = (static_cast<double>(j) + std::min(1.0, std::max(0.0, frac))) * dq;
      }
    }
    cdf(grid.size() - 1) = 1.0;
    for (Index i = 1; i < grid.size(); ++i) cdf(i) = std::max(cdf(i), cdf(i - 1));
    out.dists.push_back(GridDistribution::from_cdf(grid, cdf));
  }
  for (std::size_t k = 0; k + 1 < out.dists.size(); ++k)
    out.verdicts.push_back(fosd_compare(out.dists[k], out.dists[k + 1], 1e-8));
  return out;
}

}  // namespace distcomp
