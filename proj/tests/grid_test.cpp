#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "distcomp/io.hpp"
#include "distcomp/orders.hpp"

#include <cmath>
#include <sstream>

using namespace distcomp;

namespace {

GridDistribution two_atom(const Grid& g, Index a, double wa, Index b) {
  Vector w = Vector::Zero(g.size());
  w(a) = wa;
  w(b) = 1.0 - wa;
  return GridDistribution(g, std::move(w));
}

GridDistribution with_cdf(const Grid& g, double (*cdf)(double)) {
  Vector c(g.size());
  for (Index i = 0; i < g.size(); ++i) c(i) = cdf(g.point(i));
  return GridDistribution::from_cdf(g, c);
}

}  // namespace

TEST_CASE("grid construction invariants") {
  CHECK_THROWS_AS(Grid(Vector::Zero(1)), InvalidInput);
  Vector bad(3);
  bad << 0.0, 0.5, 0.9;
  CHECK_THROWS_AS(Grid(std::move(bad)), InvalidInput);
  Vector dup(3);
  dup << 0.0, 0.5, 0.5;
  CHECK_THROWS_AS(Grid(std::move(dup)), InvalidInput);
  Grid g = Grid::uniform(101);
  CHECK(g.size() == 101);
  CHECK(g.point(0) == 0.0);
  CHECK(g.point(100) == 1.0);
}

TEST_CASE("cdf_at point mass and uniform") {
  Grid g = Grid::uniform(201);
  auto pm = GridDistribution::point_mass(g, g.index_of(0.5));
  CHECK(pm.cdf_at(0.4) == 0.0);
  CHECK(pm.cdf_at(0.5) == 1.0);  // right-continuity includes the atom
  CHECK(pm.cdf_at(1.0) == 1.0);
  CHECK_THROWS_AS(pm.cdf_at(1.5), InvalidInput);

  Grid g101 = Grid::uniform(101);
  auto u = GridDistribution::uniform_weights(g101);
  CHECK(u.cdf_at(0.30) == doctest::Approx(31.0 / 101.0).epsilon(1e-12));
}

TEST_CASE("quantile generalized inverse") {
  Grid g = Grid::uniform(201);
  auto pm = GridDistribution::point_mass(g, g.index_of(0.5));
  CHECK(pm.quantile(0.7) == 0.5);
  CHECK(pm.quantile(0.0) == 0.5);  // min support

  auto f = two_atom(g, 0, 0.25, 200);
  CHECK(f.quantile(0.25) == 0.0);
  CHECK(f.quantile(0.26) == 1.0);
  CHECK_THROWS_AS(f.quantile(-0.1), InvalidInput);
}

TEST_CASE("quantile-cdf galois property") {
  Grid g = Grid::uniform(97);
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_distribution(g, rng);
    for (int k = 0; k <= 50; ++k) {
      double q = k / 50.0;
      CHECK(f.cdf_at(f.quantile(q)) >= q - 1e-12);
    }
  }
}

TEST_CASE("fosd compare") {
  Grid g = Grid::uniform(201);
  auto f = with_cdf(g, +[](double x) { return x * x; });
  auto h = with_cdf(g, +[](double x) { return x; });
  CHECK(fosd_compare(f, f).relation == Relation::equal);
  CHECK(fosd_compare(f, h).relation == Relation::dominates);  // x^2 <= x
  CHECK(fosd_compare(h, f).relation == Relation::dominated_by);

  // Crossing cdfs: two-atom distributions.
  auto a = two_atom(g, g.index_of(0.2), 0.5, g.index_of(0.9));
  auto b = two_atom(g, g.index_of(0.4), 0.8, g.index_of(0.6));
  auto v = fosd_compare(a, b);
  CHECK(v.relation == Relation::incomparable);
  CHECK(v.witness.has_value());
  CHECK(v.max_violation > 0.0);
}

TEST_CASE("convex order from quantile samples") {
  const int m = 1001;
  // qt - qz is single-crossing (negative then positive) with equal means:
  // int (1.5 q^2 - 0.5 q - 0.25) dq = 0.
  Vector qz(m), qt(m), q3(m);
  for (int i = 0; i < m; ++i) {
    double q = static_cast<double>(i) / (m - 1);
    qz(i) = q;
    qt(i) = q + 1.5 * q * q - 0.5 * q - 0.25;
    q3(i) = q + 0.3;
  }
  CHECK(convex_order_compare(qz, qz).relation == Relation::equal);
  CHECK(convex_order_compare(qz, qt).relation == Relation::dominates);
  CHECK(convex_order_compare(qt, qz).relation == Relation::dominated_by);
  CHECK(convex_order_compare(qz, q3).relation == Relation::incomparable);  // means differ
}

TEST_CASE("convex order verdict respects convex test functions") {
  // When the verdict says q_hi cx-dominates q_lo, E u must respect the order
  // for convex piecewise-linear u(x) = max(0, x - kink), a 20-kink family.
  const int m = 2001;
  Vector qz(m), qt(m);
  for (int i = 0; i < m; ++i) {
    double q = static_cast<double>(i) / (m - 1);
    qz(i) = q;
    qt(i) = q + 1.5 * q * q - 0.5 * q - 0.25;  // mean-neutral, single-crossing
  }
  REQUIRE(convex_order_compare(qz, qt, 1e-6).relation == Relation::dominates);
  for (int k = 0; k <= 20; ++k) {
    double kink = -0.5 + 2.0 * k / 20.0;
    double ez = 0.0, et = 0.0;
    for (int i = 0; i < m; ++i) {
      double wgt = (i == 0 || i == m - 1) ? 0.5 : 1.0;
      ez += wgt * std::max(0.0, qz(i) - kink);
      et += wgt * std::max(0.0, qt(i) - kink);
    }
    CHECK(et / (m - 1) >= ez / (m - 1) - 1e-5);
  }
}

TEST_CASE("icx compare and fosd implies icx") {
  Grid g = Grid::uniform(151);
  CHECK(icx_compare(GridDistribution::uniform_weights(g),
                    GridDistribution::uniform_weights(g))
            .relation == Relation::equal);
  Rng rng(11);
  int dominating_pairs = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto f = random_distribution(g, rng);
    auto h = random_distribution(g, rng);
    auto fo = fosd_compare(f, h);
    if (fo.relation == Relation::dominates) {
      ++dominating_pairs;
      CHECK(icx_compare(f, h).relation == Relation::dominates);
    }
    // Point mass at 1 FOSD-dominates (hence icx-dominates) anything.
    auto top = GridDistribution::point_mass(g, g.size() - 1);
    CHECK(fosd_compare(top, f).relation != Relation::dominated_by);
    auto icx = icx_compare(top, f);
    CHECK((icx.relation == Relation::dominates || icx.relation == Relation::equal));
  }
  (void)dominating_pairs;
}

TEST_CASE("max interior atom") {
  Grid g = Grid::uniform(11);
  auto u = GridDistribution::uniform_weights(g);
  CHECK(u.max_interior_atom() == doctest::Approx(1.0 / 11.0));
  CHECK(GridDistribution::point_mass(g, 0).max_interior_atom() == 0.0);
}

TEST_CASE("prize vector invariants and majorization") {
  Vector bad(3);
  bad << 1.0, 0.1, 0.0;
  CHECK_THROWS_AS(PrizeVector(std::move(bad)), InvalidInput);
  Vector up(3);
  up << 0.2, 0.8, 0.0;
  CHECK_THROWS_AS(PrizeVector(std::move(up)), InvalidInput);

  Vector wta(3), half(3);
  wta << 1.0, 0.0, 0.0;
  half << 0.5, 0.5, 0.0;
  PrizeVector w(std::move(wta)), v(std::move(half));
  CHECK(majorizes(w, v));
  CHECK(majorizes(v, v));
  CHECK(!majorizes(v, w));
}

TEST_CASE("pigou dalton path") {
  Vector a(3), b(3);
  a << 0.5, 0.5, 0.0;
  b << 1.0, 0.0, 0.0;
  PrizeVector v(std::move(a)), w(std::move(b));
  CHECK(pigou_dalton_path(v, v).empty());
  auto path = pigou_dalton_path(v, w);
  REQUIRE(path.size() == 1);
  CHECK(path[0].to_rank == 1);
  CHECK(path[0].from_rank == 2);
  CHECK(path[0].amount == doctest::Approx(0.5));

  Vector c(4), d(4);
  c << 0.4, 0.4, 0.2, 0.0;
  d << 0.7, 0.3, 0.0, 0.0;
  PrizeVector v4(std::move(c)), w4(std::move(d));
  auto p4 = pigou_dalton_path(v4, w4);
  CHECK(p4.size() == 2);
  Vector cur = v4.values();
  for (const auto& t : p4) {
    CHECK(t.to_rank < t.from_rank);
    CHECK(t.amount > 0.0);
    cur(t.to_rank - 1) += t.amount;
    cur(t.from_rank - 1) -= t.amount;
  }
  for (Index k = 0; k < 4; ++k) CHECK(cur(k) == doctest::Approx(w4.prize(k)).epsilon(1e-12));

  CHECK_THROWS_AS(pigou_dalton_path(w4, v4), AssumptionViolated);
}

TEST_CASE("pigou dalton recomposition on random majorization pairs") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Index n = 3 + rng.uniform_index(5);
    Vector raw(n);
    for (Index k = 0; k < n; ++k) raw(k) = rng.uniform();
    std::sort(raw.data(), raw.data() + n, std::greater<>());
    raw(n - 1) = 0.0;
    double s = raw.sum();
    if (s <= 0) continue;
    raw /= s;
    PrizeVector v(raw);
    // Mix toward WTA to get a majorizing partner.
    Vector mixed = 0.5 * raw + 0.5 * PrizeVector::winner_take_all(n).values();
    PrizeVector w(std::move(mixed));
    REQUIRE(majorizes(w, v));
    Vector cur = v.values();
    for (const auto& t : pigou_dalton_path(v, w)) {
      CHECK(t.to_rank < t.from_rank);
      CHECK(t.amount > 0.0);
      cur(t.to_rank - 1) += t.amount;
      cur(t.from_rank - 1) -= t.amount;
    }
    CHECK((cur - w.values()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("levy distance") {
  Grid g = Grid::uniform(101);
  auto a = GridDistribution::point_mass(g, g.index_of(0.2));
  auto b = GridDistribution::point_mass(g, g.index_of(0.3));
  // Full-height steps offset by 0.1: no vertical slack below 0.1 helps.
  CHECK(levy_distance(a, b) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(levy_distance(a, a) <= 1e-9);
  // Vertical-offset pair: cdfs differ by 0.2 everywhere inside.
  Vector w1 = Vector::Zero(g.size()), w2 = Vector::Zero(g.size());
  w1(0) = 0.5;
  w1(g.size() - 1) = 0.5;
  w2(0) = 0.3;
  w2(g.size() - 1) = 0.7;
  double d = levy_distance(GridDistribution(g, w1), GridDistribution(g, w2));
  CHECK(d == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("json and csv round trips") {
  Grid g = Grid::uniform(31);
  Rng rng(5);
  auto f = random_distribution(g, rng);
  auto j = to_json(f);
  auto back = distribution_from_json(j);
  CHECK((back.weights() - f.weights()).cwiseAbs().maxCoeff() <= 1e-15);

  std::stringstream ss;
  write_distribution_csv(ss, f);
  auto csv_back = read_distribution_csv(ss);
  CHECK((csv_back.weights() - f.weights()).cwiseAbs().maxCoeff() == 0.0);

  Json bad = {{"grid", to_json(g)}, {"weights", Json::array({1.0})}, {"extra", 1}};
  CHECK_THROWS_AS(distribution_from_json(bad), InvalidInput);
}
