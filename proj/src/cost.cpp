#include "distcomp/cost.hpp"

#include <algorithm>
#include <cmath>

namespace distcomp {

ScalarFn ScalarFn::constant(double c) {
  return ScalarFn("constant", [c](double) { return c; });
}

ScalarFn ScalarFn::affine(double a, double b) {
  return ScalarFn("affine", [a, b](double x) { return a + b * x; });
}

ScalarFn ScalarFn::power(double a, double p) {
  return ScalarFn("power", [a, p](double x) { return a * std::pow(x, p); });
}

ScalarFn ScalarFn::exp_decay(double a, double b) {
  return ScalarFn("exp_decay", [a, b](double x) { return a * std::exp(-b * x); });
}

ScalarFn ScalarFn::tabulated_spline(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw InvalidInput("tabulated_spline: need matching tables, size >= 2");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw InvalidInput("tabulated_spline: x not increasing");
  auto f = [xs = std::move(xs), ys = std::move(ys)](double x) {
    const auto n = xs.size();
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    std::size_t k = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin() - 1;
    double h = xs[k + 1] - xs[k];
    double t = (x - xs[k]) / h;
    // Catmull-Rom tangents, one-sided at the ends.
    double m0 = k == 0 ? (ys[1] - ys[0]) / h
                       : (ys[k + 1] - ys[k - 1]) / (xs[k + 1] - xs[k - 1]);
    double m1 = k + 2 >= n ? (ys[n - 1] - ys[n - 2]) / h
                           : (ys[k + 2] - ys[k]) / (xs[k + 2] - xs[k]);
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * ys[k] + (t3 - 2 * t2 + t) * h * m0 +
           (-2 * t3 + 3 * t2) * ys[k + 1] + (t3 - t2) * h * m1;
  };
  return ScalarFn("tabulated_spline", std::move(f));
}

Kernel2 Kernel2::sum(ScalarFn fx, ScalarFn gq) {
  return Kernel2("sum", [fx = std::move(fx), gq = std::move(gq)](double x, double q) {
    return fx(x) + gq(q);
  });
}

Kernel2 Kernel2::product(ScalarFn fx, ScalarFn gq) {
  return Kernel2("product", [fx = std::move(fx), gq = std::move(gq)](double x, double q) {
    return fx(x) * gq(q);
  });
}

Kernel2 Kernel2::scaled_exp(double a, double b, double c) {
  return Kernel2("scaled_exp", [a, b, c](double t, double q) {
    return (a + b * q) * std::exp(-c * t);
  });
}

const char* to_string(CostKind k) {
  switch (k) {
    case CostKind::linear: return "linear";
    case CostKind::separable: return "separable";
    case CostKind::local: return "local";
    case CostKind::tail_local: return "tail_local";
  }
  return "?";
}

CostModel CostModel::linear(ScalarFn c) {
  CostModel m;
  m.kind_ = CostKind::linear;
  m.fn_a_ = std::move(c);
  return m;
}

CostModel CostModel::separable(ScalarFn gamma, ScalarFn beta) {
  CostModel m;
  m.kind_ = CostKind::separable;
  m.fn_a_ = std::move(gamma);
  m.fn_b_ = std::move(beta);
  return m;
}

CostModel CostModel::local(Kernel2 kappa) {
  CostModel m;
  m.kind_ = CostKind::local;
  m.kernel_ = std::move(kappa);
  return m;
}

CostModel CostModel::tail_local(Kernel2 decay, double c_inf) {
  CostModel m;
  m.kind_ = CostKind::tail_local;
  m.kernel_ = std::move(decay);
  m.c_inf_ = c_inf;
  return m;
}

double CostModel::marginal(const GridDistribution& f, Index i) const {
  const double x = f.grid().point(i);
  switch (kind_) {
    case CostKind::linear:
      return fn_a_(x);
    case CostKind::separable:
      return fn_a_(x) + fn_b_(f.cdf(i));
    case CostKind::local:
      return kernel_(x, f.cdf(i));
    case CostKind::tail_local: {
      if (i == 0) return c_inf_;  // x = 0 is the t = infinity node
      double t = (1.0 - x) / x;
      double h_at_t = 1.0 - f.cdf_left(i);  // mass at times <= t(x)
      return c_inf_ + kernel_(t, h_at_t);
    }
  }
  return 0.0;
}

Vector CostModel::kernel(const GridDistribution& f) const {
  Vector out(f.grid().size());
  for (Index i = 0; i < out.size(); ++i) out(i) = marginal(f, i);
  return out;
}

namespace {

// Gauss-Legendre nodes/weights on [0,1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[k] = 0.5 * (1.0 - x);
    nodes[n - 1 - k] = 0.5 * (1.0 + x);
    weights[k] = 0.5 * w;
    weights[n - 1 - k] = 0.5 * w;
  }
}

}  // namespace

double CostModel::evaluate(const GridDistribution& f, const GridDistribution& f0) const {
  require_same_grid(f, f0);
  Vector direction = f.weights() - f0.weights();
  if (kind_ == CostKind::linear) {
    return kernel(f).dot(direction);  // kernel is F-independent, exact
  }
  auto integral = [&](int n) {
    std::vector<double> s, w;
    gauss_legendre(n, s, w);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      GridDistribution fs = f0.mix(f, s[k]);
      acc += w[k] * kernel(fs).dot(direction);
    }
    return acc;
  };
  int n = std::max(2, quadrature_steps);
  double coarse = integral(n);
  double fine = integral(2 * n);
  if (std::abs(fine - coarse) > 1e-6)
    throw NumericalFailure("CostModel::evaluate: quadrature did not stabilize");
  return fine;
}

double CostModel::evaluate_from_origin(const GridDistribution& f) const {
  return evaluate(f, GridDistribution::point_mass(f.grid(), 0));
}

GridDistribution random_distribution(const Grid& grid, Rng& rng) {
  const Index m = grid.size();
  Vector w(m);
  for (Index i = 0; i < m; ++i) w(i) = -std::log(rng.uniform() + 1e-300);
  // A third of the draws are sparse: keep a handful of atoms.
  if (rng.uniform() < 1.0 / 3.0) {
    Index keep = 2 + rng.uniform_index(4);
    Vector sparse = Vector::Zero(m);
    for (Index k = 0; k < keep; ++k) {
      Index i = rng.uniform_index(m);
      sparse(i) += w(i) + 0.1;
    }
    w = sparse;
  }
  w /= w.sum();
  return GridDistribution(grid, std::move(w));
}

double gateaux_slope(const CostModel& model, const GridDistribution& f,
                     const GridDistribution& g) {
  const Vector direction = g.weights() - f.weights();
  const double inner = model.kernel(f).dot(direction);
  const double eps_list[] = {1e-2, 1e-3, 1e-4};
  double lx[3], ly[3];
  bool all_exact = true;
  for (int k = 0; k < 3; ++k) {
    double eps = eps_list[k];
    GridDistribution fe = f.mix(g, eps);
    double err = std::abs(model.evaluate(fe, f) / eps - inner);
    // Below this scale the difference quotient is float cancellation noise.
    if (err > 1e-10 * (1.0 + std::abs(inner))) all_exact = false;
    lx[k] = std::log(eps);
    ly[k] = std::log(std::max(err, 1e-16));
  }
  if (all_exact) return 1.0;
  double mx = (lx[0] + lx[1] + lx[2]) / 3.0, my = (ly[0] + ly[1] + ly[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < 3; ++k) {
    num += (lx[k] - mx) * (ly[k] - my);
    den += (lx[k] - mx) * (lx[k] - mx);
  }
  return num / den;
}

namespace {

void check_scalar_shape(const ScalarFn& fn, bool need_zero_at_zero, bool strict_increase,
                        bool need_concave, bool nondecreasing, const std::string& name,
                        std::vector<std::string>& out) {
  const int m = 1001;
  std::vector<double> v(m);
  for (int i = 0; i < m; ++i) v[i] = fn(static_cast<double>(i) / (m - 1));
  if (need_zero_at_zero && std::abs(v[0]) > 1e-9)
    out.push_back(name + "(0) != 0");
  for (int i = 1; i < m; ++i) {
    if (strict_increase && !(v[i] > v[i - 1])) {
      out.push_back(name + " not strictly increasing");
      break;
    }
    if (nondecreasing && v[i] < v[i - 1] - 1e-12) {
      out.push_back(name + " decreasing");
      break;
    }
  }
  if (need_concave) {
    for (int i = 1; i + 1 < m; ++i) {
      if (v[i + 1] - 2 * v[i] + v[i - 1] > 1e-9) {
        out.push_back(name + " not concave");
        break;
      }
    }
  }
}

void check_structural(const CostModel& model, std::vector<std::string>& out) {
  switch (model.kind()) {
    case CostKind::linear: {
      // Refinement test: increments of a continuous function shrink with the
      // sampling step; a jump keeps them at jump height.
      auto max_incr = [&](int m) {
        double mi = 0.0;
        double prev = model.linear_c()(0.0);
        for (int i = 1; i < m; ++i) {
          double cur = model.linear_c()(static_cast<double>(i) / (m - 1));
          mi = std::max(mi, std::abs(cur - prev));
          prev = cur;
        }
        return mi;
      };
      double coarse = max_incr(2001);
      double fine = max_incr(20001);
      if (fine > 0.5 * coarse + 1e-9) out.push_back("linear kernel has a jump");
      break;
    }
    case CostKind::separable:
      check_scalar_shape(model.gamma(), true, true, true, false, "gamma", out);
      check_scalar_shape(model.beta(), true, false, false, true, "beta", out);
      break;
    case CostKind::local: {
      const int m = 101;
      for (int i = 0; i < m; ++i) {
        double x = static_cast<double>(i) / (m - 1);
        double prev = model.kappa()(x, 0.0);
        for (int j = 1; j < m; ++j) {
          double q = static_cast<double>(j) / (m - 1);
          double cur = model.kappa()(x, q);
          if (cur < prev - 1e-12) {
            out.push_back("kappa decreasing in q");
            i = m;
            break;
          }
          prev = cur;
        }
      }
      for (int j = 0; j < m; ++j) {
        double q = static_cast<double>(j) / (m - 1);
        double prev = model.kappa()(0.0, q);
        for (int i = 1; i < m; ++i) {
          double x = static_cast<double>(i) / (m - 1);
          double cur = model.kappa()(x, q);
          if (!(cur > prev)) {
            out.push_back("kappa not strictly increasing in x");
            j = m;
            break;
          }
          prev = cur;
        }
      }
      break;
    }
    case CostKind::tail_local: {
      double horizons[] = {10.0, 20.0, 40.0, 80.0};
      double prev_sup = std::numeric_limits<double>::infinity();
      for (double t : horizons) {
        double sup = 0.0;
        for (int j = 0; j <= 20; ++j) sup = std::max(sup, std::abs(model.kappa()(t, j / 20.0)));
        if (sup > prev_sup + 1e-12) {
          out.push_back("tail kernel not vanishing along the horizon");
          break;
        }
        prev_sup = sup;
      }
      if (prev_sup > 1e-3) out.push_back("tail kernel above c_inf tolerance at horizon");
      for (double t : {0.0, 0.5, 1.0, 3.0, 10.0}) {
        for (int j = 0; j <= 10; ++j) {
          if (!(model.kappa()(t, j / 10.0) > 0.0)) {
            out.push_back("kernel not strictly above c_inf at finite t");
            t = 100.0;
            break;
          }
        }
      }
      break;
    }
  }
}

}  // namespace

CostValidation validate(const CostModel& model, const Grid& grid, double pi_bar,
                        double eta1, int trial_count, std::uint64_t seed) {
  if (trial_count < 1) throw InvalidInput("validate: trial_count must be >= 1");
  CostValidation result;
  check_structural(model, result.violations);

  Rng rng(seed);
  std::vector<GridDistribution> samples;
  samples.push_back(GridDistribution::point_mass(grid, 0));
  samples.push_back(GridDistribution::point_mass(grid, grid.size() - 1));
  {
    Vector w = Vector::Zero(grid.size());
    w(0) = 0.5;
    w(grid.size() - 1) = 0.5;
    samples.push_back(GridDistribution(grid, std::move(w)));
  }
  for (int k = 0; k < trial_count; ++k) samples.push_back(random_distribution(grid, rng));

  double worst_margin = std::numeric_limits<double>::infinity();
  bool margin_flagged = false;
  for (const auto& f : samples) {
    Vector ker = model.kernel(f);
    double margin = ker(grid.size() - 1) - ker(0) - pi_bar;
    if (margin < worst_margin) {
      worst_margin = margin;
      result.worst.kernel_samples = ker;
      result.worst.c3_margin = margin;
      result.worst.value = model.evaluate_from_origin(f);
    }
    if (margin < eta1 && !margin_flagged) {
      result.violations.push_back("C3 margin below eta1");
      margin_flagged = true;
    }
  }

  for (std::size_t k = 0; k + 1 < samples.size() && k < 8; ++k) {
    const auto& f = samples[k];
    const auto& g = samples[k + 1];
    double cm = model.evaluate_from_origin(f.mix(g, 0.5));
    double avg = 0.5 * (model.evaluate_from_origin(f) + model.evaluate_from_origin(g));
    if (cm > avg + 1e-8) {
      result.violations.push_back("midpoint convexity violated");
      break;
    }
  }

  if (model.kind() != CostKind::linear) {
    for (int k = 0; k < std::min(trial_count, 5); ++k) {
      GridDistribution f = random_distribution(grid, rng);
      GridDistribution g = random_distribution(grid, rng);
      if (gateaux_slope(model, f, g) < 0.9) {
        result.violations.push_back("finite-difference derivative slope below 0.9");
        break;
      }
    }
  }

  result.pass = result.violations.empty();
  return result;
}

}  // namespace distcomp
