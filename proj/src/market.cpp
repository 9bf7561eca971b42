#include "distcomp/market.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace distcomp {

TasteDensity::TasteDensity(Vector values) : g_(std::move(values)) {
  if (g_.size() < 2) throw InvalidInput("TasteDensity: need at least 2 samples");
  cum_.resize(g_.size());
  cum_(0) = 0.0;
  const double h = 1.0 / static_cast<double>(g_.size() - 1);
  for (Index i = 0; i < g_.size(); ++i) {
    if (g_(i) < 0.0) throw InvalidInput("TasteDensity: negative density");
    if (i > 0) cum_(i) = cum_(i - 1) + 0.5 * (g_(i) + g_(i - 1)) * h;
  }
  if (std::abs(cum_(g_.size() - 1) - 1.0) > 1e-8)
    throw InvalidInput("TasteDensity: density must integrate to 1");
}

TasteDensity TasteDensity::uniform(int nodes) {
  return TasteDensity(Vector::Constant(nodes, 1.0));
}

double TasteDensity::cdf(double e) const {
  if (e <= 0.0) return 0.0;
  if (e >= 1.0) return 1.0;
  double pos = e * static_cast<double>(g_.size() - 1);
  Index i = static_cast<Index>(pos);
  double frac = pos - static_cast<double>(i);
  // Exact integral of the linearly interpolated density over the cell front.
  const double h = 1.0 / static_cast<double>(g_.size() - 1);
  double g_lo = g_(i);
  double g_at = g_lo + frac * (g_(i + 1) - g_lo);
  return cum_(i) + 0.5 * (g_lo + g_at) * frac * h;
}

void MarketSpec::check() const {
  if (n < 2) throw InvalidInput("market: n >= 2 required");
  if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidInput("market: sigma outside (0,1)");
  if (!(p_max > 0.0)) throw InvalidInput("market: p_max must be > 0");
}

Convolution convolve_hat(const GridDistribution& f, double sigma,
                         const TasteDensity& taste, int refine) {
  if (refine < 1) throw InvalidInput("convolve_hat: refine >= 1");
  const Grid& grid = f.grid();
  const Index r = refine * (grid.size() - 1) + 1;
  Convolution conv;
  conv.z.resize(r);
  conv.cdf.resize(r);
  conv.density.resize(r);
  const Index m = grid.size();
  for (Index j = 0; j < r; ++j) {
    double z = static_cast<double>(j) / static_cast<double>(r - 1);
    conv.z(j) = z;
    double acc_cdf = 0.0, acc_den = 0.0;
    for (Index i = 0; i < m; ++i) {
      double w = f.weight(i);
      if (w == 0.0) continue;
      double u = (z - (1.0 - sigma) * grid.point(i)) / sigma;
      acc_cdf += w * taste.cdf(u);
      if (u >= 0.0 && u <= 1.0) {
        double pos = u * static_cast<double>(taste.nodes() - 1);
        Index k = std::min<Index>(static_cast<Index>(pos), taste.nodes() - 2);
        double frac = pos - static_cast<double>(k);
        acc_den += w * (taste.density(k) + frac * (taste.density(k + 1) - taste.density(k))) / sigma;
      }
    }
    conv.cdf(j) = acc_cdf;
    conv.density(j) = acc_den;
  }
  return conv;
}

double Convolution::cdf_at(double zq) const {
  if (zq <= z(0)) return zq < 0.0 ? 0.0 : cdf(0);
  const Index r = z.size();
  if (zq >= z(r - 1)) return zq > 1.0 ? 1.0 : cdf(r - 1);
  double pos = zq * static_cast<double>(r - 1);
  Index j = std::min<Index>(static_cast<Index>(pos), r - 2);
  double frac = pos - static_cast<double>(j);
  return cdf(j) + frac * (cdf(j + 1) - cdf(j));
}

double omega(double q, const Convolution& conv, double sigma,
             const TasteDensity& taste, int n, double r_shift) {
  if (q < 0.0 || q > 1.0) throw InvalidInput("omega: q outside [0,1]");
  const Index e_nodes = taste.nodes();
  const double h = 1.0 / static_cast<double>(e_nodes - 1);
  double acc = 0.0;
  for (Index i = 0; i < e_nodes; ++i) {
    double e = taste.point(i);
    double val = std::pow(conv.cdf_at((1.0 - sigma) * q + sigma * e + r_shift),
                          n - 1) *
                 taste.density(i);
    acc += (i == 0 || i == e_nodes - 1) ? 0.5 * val : val;
  }
  return acc * h;
}

double price_foc(const Convolution& conv, int n) {
  const Index r = conv.z.size();
  // Per cell: density f = dF/dz constant, so int F^(n-2) f^2 dz equals
  // f (F_hi^(n-1) - F_lo^(n-1)) / (n-1); exact for piecewise-linear F_hat.
  double integral = 0.0;
  for (Index j = 0; j + 1 < r; ++j) {
    double dz = conv.z(j + 1) - conv.z(j);
    double df = conv.cdf(j + 1) - conv.cdf(j);
    if (df <= 0.0) continue;
    integral += (df / dz) *
                (std::pow(conv.cdf(j + 1), n - 1) - std::pow(conv.cdf(j), n - 1)) /
                static_cast<double>(n - 1);
  }
  if (integral < 1e-12)
    throw NumericalFailure("price_foc: density integral degenerate");
  return 1.0 / (static_cast<double>(n) * (n - 1) * integral);
}

namespace {

Vector omega_vector(const MarketSpec& spec, const Convolution& conv, double r_shift) {
  Vector w(spec.grid.size());
  for (Index i = 0; i < w.size(); ++i)
    w(i) = omega(spec.grid.point(i), conv, spec.sigma, spec.taste, spec.n, r_shift);
  return w;
}

}  // namespace

MarketEquilibrium solve_market(const MarketSpec& spec, const SolverConfig& cfg) {
  spec.check();
  cfg.check();
  // Structural cost checks only; the Inada margin does not bind here since
  // the effective prize is the endogenous equilibrium price, not p_max.
  CostValidation val = validate(spec.cost, spec.grid, 0.0, -1e9, 4, cfg.seed ^ 0x6d6bULL);
  for (const auto& v : val.violations)
    if (v.find("margin") == std::string::npos)
      throw AssumptionViolated("market: cost validation failed: " + v);

  GridDistribution f = GridDistribution::uniform_weights(spec.grid);
  Convolution conv = convolve_hat(f, spec.sigma, spec.taste);
  double p = std::clamp(price_foc(conv, spec.n), cfg.kkt_tol * 2, spec.p_max / 2);

  MarketEquilibrium out{f, conv};
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    conv = convolve_hat(f, spec.sigma, spec.taste);
    Vector a = p * omega_vector(spec, conv, 0.0);
    Vector phi = a - spec.cost.kernel(f);
    KKTReport kkt = kkt_from_phi(phi, f, cfg.support_eps, cfg.kkt_tol);
    double p_star = price_foc(conv, spec.n);
    bool price_ok = std::abs(p - p_star) <= cfg.kkt_tol * std::max(p, 1e-6);
    if (kkt.converged && price_ok) {
      out.kkt = kkt;
      out.converged = true;
      break;
    }
    InnerSolve inner = maximize_linear_minus_cost(a, spec.cost, f, cfg, cfg.kkt_tol / 4.0);
    f = f.mix(inner.dist, cfg.damping);
    p = price_foc(convolve_hat(f, spec.sigma, spec.taste), spec.n);
    if (!(p > cfg.kkt_tol && p < spec.p_max - cfg.kkt_tol))
      throw AssumptionViolated("market: price left the interior of [0, p_max]");
    out.kkt = kkt;
  }

  out.quality = f;
  out.conv = conv;
  out.price = p;
  out.lambda_g = out.kkt.lambda;
  out.iterations = iter;

  auto supp = f.support(cfg.support_eps);
  Index lo = supp.empty() ? 0 : supp.front();
  Index hi = supp.empty() ? 0 : supp.back();
  out.q_lo = spec.grid.point(lo);
  out.q_hi = spec.grid.point(hi);
  out.cost_gap = spec.cost.marginal(f, hi) - spec.cost.marginal(f, lo);
  out.omega_gap = omega(out.q_hi, conv, spec.sigma, spec.taste, spec.n) -
                  omega(out.q_lo, conv, spec.sigma, spec.taste, spec.n);

  // Joint-deviation probe: best distribution at each scanned price.
  Vector a_eq = p * omega_vector(spec, conv, 0.0);
  double value_eq = a_eq.dot(f.weights()) - spec.cost.evaluate_from_origin(f);
  double best = value_eq;
  for (int k = 0; k <= 100; ++k) {
    double r = spec.p_max * static_cast<double>(k) / 100.0;
    Vector a_r = r * omega_vector(spec, conv, p - r);
    InnerSolve dev = maximize_linear_minus_cost(a_r, spec.cost, f, cfg, cfg.kkt_tol / 4.0);
    double value = a_r.dot(dev.dist.weights()) - spec.cost.evaluate_from_origin(dev.dist);
    best = std::max(best, value);
  }
  out.price_dev_gap = best - value_eq;
  return out;
}

std::vector<LimitRow> limit_sweep(const MarketSpec& base, const std::vector<int>& n_list,
                                  const SolverConfig& cfg, int threads) {
  for (std::size_t k = 0; k < n_list.size(); ++k)
    if (n_list[k] < 2 || (k > 0 && n_list[k] <= n_list[k - 1]))
      throw InvalidInput("limit_sweep: n_list must be ascending, entries >= 2");
  std::vector<LimitRow> rows(n_list.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= n_list.size()) return;
      try {
        MarketSpec spec = base;
        spec.n = n_list[k];
        MarketEquilibrium eq = solve_market(spec, cfg);
        LimitRow row;
        row.n = spec.n;
        row.price = eq.price;
        row.lambda_g = eq.lambda_g;
        row.cost_gap = eq.cost_gap;
        row.q_lo = eq.q_lo;
        row.q_hi = eq.q_hi;
        row.kkt_sup = eq.kkt.sup_violation;
        row.price_dev_gap = eq.price_dev_gap;
        row.converged = eq.converged;
        if (base.cost.steepness) {
          row.steep_ok = (eq.q_hi - eq.q_lo) <=
                         eq.cost_gap / *base.cost.steepness + 10.0 * cfg.kkt_tol;
        }
        rows[k] = row;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  int t = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

}  // namespace distcomp
