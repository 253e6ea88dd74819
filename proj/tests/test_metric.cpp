#include <catch_amalgamated.hpp>

#include <cmath>

#include "coulomb/measures.hpp"
#include "coulomb/rng.hpp"

using namespace coulomb;

namespace {

DiscreteMeasure diracs(std::vector<PlanePoint> pts, std::vector<double> m) {
  return DiscreteMeasure::atoms(Chart::plane, std::move(pts), std::move(m));
}

DiscreteMeasure random_on(const Grid& g, rng_stream& rng) {
  std::vector<double> m(g.size());
  double s = 0.0;
  for (double& v : m) {
    v = rng.uniform();
    s += v;
  }
  for (double& v : m) v /= s;
  return DiscreteMeasure::from_grid(g, m);
}

}  // namespace

TEST_CASE("dirac pairs cost the truncated distance") {
  const DiscreteMeasure a = DiscreteMeasure::dirac(Chart::plane, {0.0, 0.0});
  const DiscreteMeasure b = DiscreteMeasure::dirac(Chart::plane, {1.0, 0.0});
  const DiscreteMeasure c = DiscreteMeasure::dirac(Chart::plane, {7.0, 0.0});
  REQUIRE(std::abs(bl_distance(a, b) - 1.0) < 1e-12);
  REQUIRE(std::abs(bl_distance(a, c) - 2.0) < 1e-12);  // cost capped at 2
  REQUIRE(bl_distance(a, a) == 0.0);
}

TEST_CASE("splitting a dirac into two half-masses has the mean transport cost") {
  const DiscreteMeasure mu = DiscreteMeasure::dirac(Chart::plane, {0.0, 0.0});
  const DiscreteMeasure nu = diracs({{0.5, 0.0}, {1.5, 0.0}}, {0.5, 0.5});
  REQUIRE(std::abs(bl_distance(mu, nu) - 1.0) < 1e-12);
}

TEST_CASE("sphere-chart diracs use the chordal metric") {
  const DiscreteMeasure a = DiscreteMeasure::dirac(Chart::sphere, {0.0, 0.0});
  const DiscreteMeasure b = DiscreteMeasure::dirac(Chart::sphere, {1.0, 0.0});
  const DiscreteMeasure p = DiscreteMeasure::dirac(Chart::sphere, PlanePoint::infinity());
  REQUIRE(std::abs(bl_distance(a, b) - 1.0 / std::sqrt(2.0)) < 1e-12);
  REQUIRE(std::abs(bl_distance(a, p) - 1.0) < 1e-12);
}

TEST_CASE("one-dimensional fast path agrees with the general solver") {
  rng_stream rng(17, 0);
  const Grid g1 = build_grid(Domain::interval(-1.0, 1.0), 40);
  const Grid g2 = build_grid(Domain::interval(-0.5, 1.5), 37);
  for (int t = 0; t < 6; ++t) {
    DiscreteMeasure mu = random_on(g1, rng);
    DiscreteMeasure nu = random_on(g2, rng);
    const double fast = bl_distance(mu, nu);
    DiscreteMeasure mu2 = mu, nu2 = nu;
    mu2.one_dimensional = false;  // route the same data through the LP solver
    nu2.one_dimensional = false;
    const double general = bl_distance(mu2, nu2);
    REQUIRE(std::abs(fast - general) < 1e-9);
  }
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
  rng_stream rng(29, 0);
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 60);
  for (int t = 0; t < 5; ++t) {
    const DiscreteMeasure a = random_on(g, rng);
    const DiscreteMeasure b = random_on(g, rng);
    const DiscreteMeasure c = random_on(g, rng);
    const double ab = bl_distance(a, b);
    const double ba = bl_distance(b, a);
    const double bc = bl_distance(b, c);
    const double ac = bl_distance(a, c);
    REQUIRE(std::abs(ab - ba) < 1e-10);
    REQUIRE(ac - (ab + bc) < 1e-10);
  }
}

TEST_CASE("identical measures are at distance zero, disjoint far ones at two") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 25);
  std::vector<double> m(g.size(), 1.0 / static_cast<double>(g.size()));
  const DiscreteMeasure mu = DiscreteMeasure::from_grid(g, m);
  REQUIRE(bl_distance(mu, mu) == 0.0);
  const Grid far = build_grid(Domain::interval(100.0, 102.0), 25);
  const DiscreteMeasure nu = DiscreteMeasure::from_grid(far, m);
  REQUIRE(std::abs(bl_distance(mu, nu) - 2.0) < 1e-12);
}

TEST_CASE("distance scales linearly for small shifts of a block") {
  // everything within diameter < 2, so the cap never binds and the metric is W1
  const Grid g = build_grid(Domain::interval(0.0, 0.5), 20);
  std::vector<double> m(g.size(), 1.0 / static_cast<double>(g.size()));
  const DiscreteMeasure mu = DiscreteMeasure::from_grid(g, m);
  for (double shift : {0.05, 0.1, 0.2}) {
    const Grid gs = build_grid(Domain::interval(shift, 0.5 + shift), 20);
    const DiscreteMeasure nu = DiscreteMeasure::from_grid(gs, m);
    REQUIRE(std::abs(bl_distance(mu, nu) - shift) < 1e-12);
  }
}

TEST_CASE("mismatched charts and non-probability inputs are contract errors") {
  const DiscreteMeasure plane = DiscreteMeasure::dirac(Chart::plane, {0.0, 0.0});
  const DiscreteMeasure sphere = DiscreteMeasure::dirac(Chart::sphere, {0.0, 0.0});
  REQUIRE_THROWS_AS(bl_distance(plane, sphere), error);
  DiscreteMeasure heavy = diracs({{0.0, 0.0}}, {2.0});
  REQUIRE_THROWS_AS(bl_distance(plane, heavy), error);
}

TEST_CASE("two-dimensional atom clouds are handled by the general solver") {
  const DiscreteMeasure mu =
      diracs({{0.0, 0.0}, {0.0, 1.0}}, {0.5, 0.5});
  const DiscreteMeasure nu =
      diracs({{1.0, 0.0}, {1.0, 1.0}}, {0.5, 0.5});
  REQUIRE(std::abs(bl_distance(mu, nu) - 1.0) < 1e-12);
  const DiscreteMeasure diag = diracs({{1.0, 1.0}}, {1.0});
  const double d = bl_distance(mu, diag);
  REQUIRE(std::abs(d - 0.5 * (std::sqrt(2.0) + 1.0)) < 1e-12);
}
