#pragma once

#include "distcomp/grid.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace distcomp {

// Named scalar function, kept alongside its construction recipe so CLI runs
// can echo configurations verbatim.
class ScalarFn {
 public:
  ScalarFn() = default;
  ScalarFn(std::string label, std::function<double(double)> f)
      : label_(std::move(label)), f_(std::move(f)) {}

  static ScalarFn constant(double c);
  static ScalarFn affine(double a, double b);       // a + b*x
  static ScalarFn power(double a, double p);        // a*x^p
  static ScalarFn exp_decay(double a, double b);    // a*exp(-b*x)
  // Cubic-Hermite (Catmull-Rom) interpolant through (xs, ys), clamped ends.
  static ScalarFn tabulated_spline(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const { return f_(x); }
  const std::string& label() const { return label_; }
  bool valid() const { return static_cast<bool>(f_); }

 private:
  std::string label_;
  std::function<double(double)> f_;
};

// Two-argument kernel (x or t in the first slot, a cdf level q in the second).
class Kernel2 {
 public:
  Kernel2() = default;
  Kernel2(std::string label, std::function<double(double, double)> f)
      : label_(std::move(label)), f_(std::move(f)) {}

  static Kernel2 sum(ScalarFn fx, ScalarFn gq);       // f(x) + g(q)
  static Kernel2 product(ScalarFn fx, ScalarFn gq);   // f(x) * g(q)
  // (a + b*q) * exp(-c*t): the decay family used by the race instances.
  static Kernel2 scaled_exp(double a, double b, double c);

  double operator()(double x, double q) const { return f_(x, q); }
  const std::string& label() const { return label_; }
  bool valid() const { return static_cast<bool>(f_); }

 private:
  std::string label_;
  std::function<double(double, double)> f_;
};

enum class CostKind { linear, separable, local, tail_local };

const char* to_string(CostKind k);

// Convex cost functional represented by its derivative kernel c_F. Only
// cost DIFFERENCES are defined: evaluate() integrates the kernel along the
// straight segment between two distributions, which is exact for any
// functional whose directional derivative has this kernel. Linear costs
// bypass quadrature entirely.
class CostModel {
 public:
  static CostModel linear(ScalarFn c);
  static CostModel separable(ScalarFn gamma, ScalarFn beta);
  static CostModel local(Kernel2 kappa);
  // Kernel in time coordinates: c_F(x) = c_inf + decay(t(x), H(t(x))) with
  // t(x) = (1-x)/x and H the law of t(X); the x = 0 node carries c_inf.
  static CostModel tail_local(Kernel2 decay, double c_inf);

  CostKind kind() const { return kind_; }
  double c_inf() const { return c_inf_; }
  int quadrature_steps = 64;

  // Derivative kernel c_F at grid node i.
  double marginal(const GridDistribution& f, Index i) const;
  // Kernel sampled at every node.
  Vector kernel(const GridDistribution& f) const;

  // C(f) - C(f0) by Gauss-Legendre quadrature along f_s = (1-s) f0 + s f,
  // with a doubled-node refinement as the error estimate. NumericalFailure
  // if the estimate exceeds 1e-6.
  double evaluate(const GridDistribution& f, const GridDistribution& f0) const;
  // Reference fixed to the point mass at 0 (C normalized to 0 there).
  double evaluate_from_origin(const GridDistribution& f) const;

  const ScalarFn& gamma() const { return fn_a_; }
  const ScalarFn& beta() const { return fn_b_; }
  const ScalarFn& linear_c() const { return fn_a_; }
  const Kernel2& kappa() const { return kernel_; }

  // Declared steepness constant: c_F(y) - c_F(x) >= steepness * (y - x).
  std::optional<double> steepness;

 private:
  CostKind kind_ = CostKind::linear;
  ScalarFn fn_a_, fn_b_;
  Kernel2 kernel_;
  double c_inf_ = 0.0;
};

// Snapshot of the kernel at one distribution plus the Inada-type margin
// c_F(1) - c_F(0) - pi_bar.
struct CostReport {
  double value = 0.0;
  Vector kernel_samples;
  double c3_margin = 0.0;
};

struct CostValidation {
  bool pass = true;
  std::vector<std::string> violations;
  CostReport worst;  // report at the distribution with the smallest margin
};

// Samples `trial_count` random distributions (plus two-point extremes) and
// checks (i) the margin c_F(1) - c_F(0) >= pi_bar + eta1 on every sample,
// (ii) midpoint convexity of C against a common reference, (iii) the
// finite-difference slope of the directional-derivative error, and the
// kind-specific structural conditions. Violations are reported, not thrown.
CostValidation validate(const CostModel& model, const Grid& grid, double pi_bar,
                        double eta1, int trial_count, std::uint64_t seed);

// Random distribution on the grid (Dirichlet-like, occasionally sparse).
GridDistribution random_distribution(const Grid& grid, Rng& rng);

// Fitted log-log slope of err(eps) for eps in {1e-2,1e-3,1e-4}, where
// err = |evaluate(F + eps (G - F), ref = F)/eps - sum c_F d(G - F)|.
// Returns 1.0 when every error is at float level (exact kernels).
double gateaux_slope(const CostModel& model, const GridDistribution& f,
                     const GridDistribution& g);

}  // namespace distcomp
