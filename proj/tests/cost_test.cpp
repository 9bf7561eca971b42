#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "distcomp/cost.hpp"

#include <cmath>

using namespace distcomp;

namespace {

CostModel linear_2x() { return CostModel::linear(ScalarFn::affine(0.0, 2.0)); }

CostModel separable_2x_q() {
  return CostModel::separable(ScalarFn::affine(0.0, 2.0), ScalarFn::affine(0.0, 1.0));
}

}  // namespace

TEST_CASE("marginal per kind") {
  Grid g = Grid::uniform(201);
  auto u = GridDistribution::uniform_weights(g);

  auto lin = linear_2x();
  CHECK(lin.marginal(u, g.index_of(0.25)) == doctest::Approx(0.5));  // F-independent

  auto sep = separable_2x_q();
  Index i_half = g.index_of(0.5);
  CHECK(sep.marginal(u, i_half) ==
        doctest::Approx(2.0 * 0.5 + u.cdf(i_half)).epsilon(1e-12));

  auto loc = CostModel::local(Kernel2::product(ScalarFn::affine(0.0, 1.0),
                                               ScalarFn::constant(1.0)));
  for (Index i : {Index(0), i_half, g.size() - 1})
    CHECK(loc.marginal(u, i) == doctest::Approx(g.point(i)));  // q-independent

  // Tail-local: the x = 0 node carries c_inf; elsewhere the time kernel.
  auto tail = CostModel::tail_local(Kernel2::scaled_exp(1.2, 0.3, 2.0), 0.05);
  CHECK(tail.marginal(u, 0) == doctest::Approx(0.05));
  Index i1 = g.size() - 1;  // x = 1 is t = 0
  double h_at_0 = 1.0 - u.cdf_left(i1);
  CHECK(tail.marginal(u, i1) == doctest::Approx(0.05 + (1.2 + 0.3 * h_at_0)));
}

TEST_CASE("evaluate: linear exact and zero segment") {
  Grid g = Grid::uniform(101);
  auto lin = linear_2x();
  auto pm = GridDistribution::point_mass(g, g.index_of(0.7));
  auto origin = GridDistribution::point_mass(g, 0);
  CHECK(lin.evaluate(pm, origin) == doctest::Approx(1.4));  // c(x) - c(0)
  CHECK(lin.evaluate(origin, origin) == 0.0);

  auto sep = separable_2x_q();
  CHECK(sep.evaluate(origin, origin) == doctest::Approx(0.0));
}

TEST_CASE("evaluate: quadrature refinement oracle") {
  // Doubling the quadrature resolution moves the separable line integral by
  // less than 1e-8 (the kernels are smooth along segments).
  Grid g = Grid::uniform(101);
  auto sep = separable_2x_q();
  auto top = GridDistribution::point_mass(g, g.size() - 1);
  double coarse_val, fine_val;
  {
    CostModel m = sep;
    m.quadrature_steps = 32;
    coarse_val = m.evaluate_from_origin(top);
  }
  {
    CostModel m = sep;
    m.quadrature_steps = 64;
    fine_val = m.evaluate_from_origin(top);
  }
  CHECK(std::abs(coarse_val - fine_val) <= 1e-8);
  // Hand value: along delta_0 -> delta_1, the kernel difference is
  // c_{F_s}(1) - c_{F_s}(0) = (2 + beta(1)) - beta(1 - s) = 3 - (1 - s),
  // whose s-integral over [0,1] is 2.5.
  CHECK(fine_val == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("evaluate is additive along collinear reference chains") {
  Grid g = Grid::uniform(61);
  Rng rng(19);
  auto models = {separable_2x_q(),
                 CostModel::local(Kernel2::sum(ScalarFn::power(1.0, 2.0),
                                               ScalarFn::power(0.5, 1.0)))};
  for (const auto& m : models) {
    for (int trial = 0; trial < 5; ++trial) {
      auto f0 = random_distribution(g, rng);
      auto f1 = random_distribution(g, rng);
      auto mid = f0.mix(f1, 0.5);
      double whole = m.evaluate(f1, f0);
      double legs = m.evaluate(mid, f0) + m.evaluate(f1, mid);
      CHECK(whole == doctest::Approx(legs).epsilon(1e-7));
    }
  }
}

TEST_CASE("finite-difference derivative slope") {
  Grid g = Grid::uniform(81);
  Rng rng(23);
  auto sep = CostModel::separable(ScalarFn::power(1.0, 0.8), ScalarFn::power(0.4, 2.0));
  auto loc = CostModel::local(Kernel2::sum(ScalarFn::power(1.0, 2.0),
                                           ScalarFn::power(0.5, 1.0)));
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_distribution(g, rng);
    auto h = random_distribution(g, rng);
    CHECK(gateaux_slope(sep, f, h) >= 0.9);
    CHECK(gateaux_slope(loc, f, h) >= 0.9);
    CHECK(gateaux_slope(linear_2x(), f, h) == 1.0);  // exact
  }
}

TEST_CASE("midpoint convexity on segments") {
  Grid g = Grid::uniform(81);
  Rng rng(29);
  auto sep = separable_2x_q();
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_distribution(g, rng);
    auto h = random_distribution(g, rng);
    double mid = sep.evaluate_from_origin(f.mix(h, 0.5));
    double avg = 0.5 * (sep.evaluate_from_origin(f) + sep.evaluate_from_origin(h));
    CHECK(mid <= avg + 1e-8);
    // Sampled second differences along the segment are nonnegative.
    double c0 = sep.evaluate(f, f);
    double c1 = sep.evaluate(f.mix(h, 0.25), f);
    double c2 = sep.evaluate(f.mix(h, 0.5), f);
    double c3 = sep.evaluate(f.mix(h, 0.75), f);
    double c4 = sep.evaluate(h, f);
    CHECK(c2 - 2 * c1 + c0 >= -1e-9);
    CHECK(c3 - 2 * c2 + c1 >= -1e-9);
    CHECK(c4 - 2 * c3 + c2 >= -1e-9);
  }
}

TEST_CASE("validate: pass, C3 failure, degenerate trials") {
  Grid g = Grid::uniform(101);
  auto lin = linear_2x();
  auto ok = validate(lin, g, 1.0, 0.5, 8, 42);
  CHECK(ok.pass);  // c(1) - c(0) = 2 >= 1 + 0.5
  CHECK(ok.worst.c3_margin == doctest::Approx(1.0));

  auto weak = CostModel::separable(ScalarFn::affine(0.0, 1.0), ScalarFn::constant(0.0));
  auto bad = validate(weak, g, 1.0, 0.1, 8, 42);
  CHECK(!bad.pass);
  bool found = false;
  for (const auto& v : bad.violations) found |= v.find("C3") != std::string::npos;
  CHECK(found);

  CHECK_THROWS_AS(validate(lin, g, 1.0, 0.5, 0, 42), InvalidInput);
}

TEST_CASE("validate: structural shape violations") {
  Grid g = Grid::uniform(51);
  // gamma must be concave and strictly increasing.
  auto convex_gamma =
      CostModel::separable(ScalarFn::power(1.0, 2.0), ScalarFn::constant(0.0));
  auto r1 = validate(convex_gamma, g, 0.0, -10.0, 2, 1);
  CHECK(!r1.pass);

  // beta must be nondecreasing.
  auto bad_beta =
      CostModel::separable(ScalarFn::affine(0.0, 2.0), ScalarFn::affine(0.0, -0.5));
  CHECK(!validate(bad_beta, g, 0.0, -10.0, 2, 1).pass);

  // local kernel decreasing in q is flagged.
  auto bad_local = CostModel::local(
      Kernel2::sum(ScalarFn::affine(0.0, 1.0), ScalarFn::affine(0.0, -0.2)));
  CHECK(!validate(bad_local, g, 0.0, -10.0, 2, 1).pass);

  // tail-local with the race decay passes its tail checks.
  auto tail = CostModel::tail_local(Kernel2::scaled_exp(1.2, 0.3, 2.0), 0.05);
  auto r2 = validate(tail, g, 1.0, 0.1, 4, 7);
  CHECK(r2.pass);
}

TEST_CASE("tabulated spline endpoints and interpolation") {
  auto s = ScalarFn::tabulated_spline({0.0, 0.5, 1.0}, {0.0, 0.4, 1.0});
  CHECK(s(0.0) == 0.0);
  CHECK(s(1.0) == 1.0);
  CHECK(s(0.5) == doctest::Approx(0.4));
  CHECK(s(0.25) > 0.0);
  CHECK(s(0.25) < 0.4);
}
