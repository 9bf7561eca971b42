#include "distcomp/orders.hpp"

#include <algorithm>
#include <cmath>

namespace distcomp {

const char* to_string(Relation r) {
  switch (r) {
    case Relation::dominates: return "dominates";
    case Relation::dominated_by: return "dominated_by";
    case Relation::equal: return "equal";
    case Relation::incomparable: return "incomparable";
  }
  return "?";
}

namespace {

// Builds a verdict from the one-sided violation profiles: d_fg(i) > 0 where
// the f-dominates inequality fails, d_gf(i) > 0 where the reverse fails.
OrderVerdict verdict_from_violations(const Vector& d_fg, const Vector& d_gf,
                                     const Vector& locs, double tol) {
  Index i_fg, i_gf;
  double v_fg = d_fg.maxCoeff(&i_fg);
  double v_gf = d_gf.maxCoeff(&i_gf);
  OrderVerdict out;
  if (v_fg <= tol && v_gf <= tol) {
    out.relation = Relation::equal;
    out.max_violation = std::max(0.0, std::max(v_fg, v_gf));
  } else if (v_fg <= tol) {
    out.relation = Relation::dominates;
    out.max_violation = std::max(0.0, v_fg);
  } else if (v_gf <= tol) {
    out.relation = Relation::dominated_by;
    out.max_violation = std::max(0.0, v_gf);
  } else {
    out.relation = Relation::incomparable;
    // Witness the failure of the direction that comes closer to holding.
    out.max_violation = std::min(v_fg, v_gf);
    out.witness = locs(v_fg <= v_gf ? i_fg : i_gf);
  }
  return out;
}

}  // namespace

OrderVerdict fosd_compare(const GridDistribution& f, const GridDistribution& g,
                          double tol) {
  require_same_grid(f, g);
  Vector d_fg = f.cdf() - g.cdf();   // >0 where f fails to dominate
  Vector d_gf = -d_fg;
  return verdict_from_violations(d_fg, d_gf, f.grid().points(), tol);
}

OrderVerdict convex_order_compare(const Vector& q_lo, const Vector& q_hi, double tol) {
  if (q_lo.size() != q_hi.size() || q_lo.size() < 2)
    throw InvalidInput("convex_order_compare: quantile sample length mismatch");
  const Index m = q_lo.size();
  const double dq = 1.0 / static_cast<double>(m - 1);
  Vector diff = q_hi - q_lo;
  // H(p) = int_0^p (q_hi - q_lo) dq, trapezoid on the uniform q-grid.
  Vector h(m);
  h(0) = 0.0;
  for (Index i = 1; i < m; ++i)
    h(i) = h(i - 1) + 0.5 * (diff(i) + diff(i - 1)) * dq;
  if (std::abs(h(m - 1)) > tol) {
    OrderVerdict out;
    out.relation = Relation::incomparable;  // unequal means
    out.max_violation = std::abs(h(m - 1));
    out.witness = 1.0;
    return out;
  }
  Vector qs(m);
  for (Index i = 0; i < m; ++i) qs(i) = static_cast<double>(i) * dq;
  // q_hi-dominates requires H <= 0; the reverse requires H >= 0.
  return verdict_from_violations(h, Vector(-h), qs, tol);
}

Vector integrated_survival(const GridDistribution& f) {
  const Grid& g = f.grid();
  const Index m = g.size();
  Vector out(m);
  out(m - 1) = 0.0;
  for (Index i = m - 2; i >= 0; --i) {
    out(i) = out(i + 1) + (1.0 - f.cdf(i)) * (g.point(i + 1) - g.point(i));
  }
  return out;
}

OrderVerdict icx_compare(const GridDistribution& f, const GridDistribution& g,
                         double tol) {
  require_same_grid(f, g);
  Vector sf = integrated_survival(f);
  Vector sg = integrated_survival(g);
  Vector d_fg = sg - sf;  // >0 where f's integrated survival falls short
  Vector d_gf = -d_fg;
  return verdict_from_violations(d_fg, d_gf, f.grid().points(), tol);
}

double levy_distance(const GridDistribution& f, const GridDistribution& g) {
  require_same_grid(f, g);
  const Grid& grid = f.grid();
  const Index m = grid.size();
  // eps feasible iff F(x - eps) - eps <= G(x) <= F(x + eps) + eps for all x.
  // For step cdfs the binding x are the jump points; checking both cdfs at
  // the jump points of either is exact up to the bisection tolerance.
  auto val = [](const GridDistribution& d, double x) {
    if (x < 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return d.cdf_at(x);
  };
  auto feasible = [&](double eps) {
    for (Index i = 0; i < m; ++i) {
      double x = grid.point(i);
      // At the jumps of the left-hand cdf ...
      if (g.cdf(i) > val(f, x + eps) + eps + 1e-15) return false;
      if (f.cdf(i) > val(g, x + eps) + eps + 1e-15) return false;
      // ... and just below the shifted jumps of the right-hand cdf, where
      // F(x + eps) still sits at its left limit.
      double xl = x - eps - 1e-12;
      double fl = val(f, x - 1e-12);
      double gl = val(g, x - 1e-12);
      if (val(g, xl) > fl + eps + 1e-15) return false;
      if (val(f, xl) > gl + eps + 1e-15) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

PrizeVector::PrizeVector(Vector v) : v_(std::move(v)) {
  if (v_.size() < 2) throw InvalidInput("PrizeVector: need n >= 2");
  double total = 0.0;
  for (Index k = 0; k < v_.size(); ++k) {
    if (k > 0 && v_(k) > v_(k - 1) + 1e-12)
      throw InvalidInput("PrizeVector: prizes must be nonincreasing");
    total += v_(k);
  }
  if (std::abs(v_(v_.size() - 1)) > 1e-12)
    throw InvalidInput("PrizeVector: last prize must be 0");
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidInput("PrizeVector: prizes must sum to 1");
}

PrizeVector PrizeVector::winner_take_all(Index n) {
  Vector v = Vector::Zero(n);
  v(0) = 1.0;
  return PrizeVector(std::move(v));
}

bool majorizes(const PrizeVector& w, const PrizeVector& v) {
  if (w.size() != v.size()) throw InvalidInput("majorizes: length mismatch");
  double pw = 0.0, pv = 0.0;
  for (Index m = 0; m < w.size(); ++m) {
    pw += w.prize(m);
    pv += v.prize(m);
    if (pw < pv - 1e-12) return false;
  }
  return std::abs(pw - pv) <= 1e-12;
}

std::vector<Transfer> pigou_dalton_path(const PrizeVector& v, const PrizeVector& w) {
  if (!majorizes(w, v)) throw AssumptionViolated("pigou_dalton_path: w must majorize v");
  Vector cur = v.values();
  const Vector& target = w.values();
  std::vector<Transfer> path;
  for (int guard = 0; guard < 4 * static_cast<int>(cur.size()); ++guard) {
    Index j = -1, i = -1;
    for (Index k = cur.size() - 1; k >= 0; --k) {
      if (target(k) < cur(k) - 1e-13) { j = k; break; }
    }
    if (j < 0) break;
    for (Index k = j - 1; k >= 0; --k) {
      if (target(k) > cur(k) + 1e-13) { i = k; break; }
    }
    if (i < 0) throw AssumptionViolated("pigou_dalton_path: no receiving rank");
    double delta = std::min(cur(j) - target(j), target(i) - cur(i));
    cur(j) -= delta;
    cur(i) += delta;
    path.push_back(Transfer{static_cast<int>(i) + 1, static_cast<int>(j) + 1, delta});
  }
  for (Index k = 0; k < cur.size(); ++k) {
    if (std::abs(cur(k) - target(k)) > 1e-12)
      throw NumericalFailure("pigou_dalton_path: recomposition drift");
  }
  return path;
}

}  // namespace distcomp
