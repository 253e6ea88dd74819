#include <catch_amalgamated.hpp>

#include <cmath>

#include "coulomb/geometry.hpp"
#include "coulomb/rng.hpp"

using namespace coulomb;

TEST_CASE("stereographic projection lands on the half-unit sphere") {
  rng_stream rng(42, 0);
  for (int t = 0; t < 200; ++t) {
    const PlanePoint z{rng.normal() * 10.0, rng.normal() * 10.0};
    const SpherePoint s = stereo_project(z);
    const double r2 = s.x * s.x + s.y * s.y + (s.z - 0.5) * (s.z - 0.5);
    REQUIRE(std::abs(r2 - 0.25) < 1e-14);
  }
  const SpherePoint pole = stereo_project(PlanePoint::infinity());
  REQUIRE(pole.x == 0.0);
  REQUIRE(pole.y == 0.0);
  REQUIRE(pole.z == 1.0);
}

TEST_CASE("chordal distance factorization holds to near machine precision") {
  rng_stream rng(7, 0);
  double worst = 0.0;
  for (int t = 0; t < 5000; ++t) {
    const PlanePoint z{std::tan(3.0 * (rng.uniform() - 0.5)), rng.normal()};
    const PlanePoint u{rng.normal() * 5.0, std::tan(3.0 * (rng.uniform() - 0.5))};
    const double lhs = chordal_distance(stereo_project(z), stereo_project(u));
    const double rhs = std::hypot(z.re - u.re, z.im - u.im) /
                       (std::sqrt(1.0 + z.abs2()) * std::sqrt(1.0 + u.abs2()));
    const double denom = std::max(lhs, 1e-300);
    worst = std::max(worst, std::abs(lhs - rhs) / denom);
  }
  REQUIRE(worst < 1e-12);
}

TEST_CASE("distance to the infinity marker is the reciprocal lift factor") {
  const PlanePoint z{3.0, -4.0};
  const double d = chordal_distance(z, PlanePoint::infinity());
  REQUIRE(std::abs(d - 1.0 / std::sqrt(1.0 + 25.0)) < 1e-15);
  REQUIRE(chordal_distance(PlanePoint::infinity(), PlanePoint::infinity()) == 0.0);
}

TEST_CASE("projection round-trip returns the starting point") {
  rng_stream rng(11, 0);
  for (int t = 0; t < 1000; ++t) {
    const PlanePoint z{std::tan(3.1 * (rng.uniform() - 0.5)), rng.normal() * 3.0};
    const PlanePoint back = stereo_inverse(stereo_project(z));
    REQUIRE(chordal_distance(z, back) < 1e-12);
  }
  REQUIRE(stereo_inverse(SpherePoint{0.0, 0.0, 1.0}).at_infinity);
}

TEST_CASE("domain membership respects boundaries and the infinity marker") {
  const Domain iv = Domain::interval(-1.0, 1.0);
  REQUIRE(iv.contains({0.0, 0.0}));
  REQUIRE(iv.contains({-1.0, 0.0}));
  REQUIRE(!iv.contains({1.5, 0.0}));
  REQUIRE(!iv.contains({0.0, 0.5}));
  REQUIRE(!iv.contains(PlanePoint::infinity()));

  const Domain line = Domain::real_line();
  REQUIRE(line.contains({1e9, 0.0}));
  REQUIRE(line.contains(PlanePoint::infinity()));
  REQUIRE(!line.contains({0.0, 1.0}));

  const Domain half = Domain::half_line();
  REQUIRE(half.contains({2.0, 0.0}));
  REQUIRE(!half.contains({-2.0, 0.0}));

  const Domain dk = Domain::disk(1.0, 2.0, 0.5);
  REQUIRE(dk.contains({1.2, 2.1}));
  REQUIRE(!dk.contains({2.0, 2.0}));
  REQUIRE(Domain::plane().contains(PlanePoint::infinity()) );
}

TEST_CASE("interval grids tile the interval exactly") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 250);
  REQUIRE(g.size() == 250);
  REQUIRE(g.chart == Chart::plane);
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    total += g.cell_measure[i];
    REQUIRE(g.cell_measure[i] > 0.0);
    REQUIRE(g.spacing[i] == g.cell_measure[i]);
    REQUIRE(g.domain.contains(g.points[i]));
  }
  REQUIRE(std::abs(total - 2.0) < 1e-12);
  REQUIRE(std::abs(g.points.front().re - (-1.0 + 1.0 / 250.0)) < 1e-15);
  REQUIRE(std::abs(g.points.back().re - (1.0 - 1.0 / 250.0)) < 1e-15);
}

TEST_CASE("real-line grids live on the sphere chart with a truncated pole cell") {
  const Grid g = build_grid(Domain::real_line(), 500);
  REQUIRE(g.chart == Chart::sphere);
  REQUIRE(g.sphere_points.size() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(g.cell_measure[i] > 0.0);
    REQUIRE(std::isfinite(g.cell_measure[i]));
    REQUIRE(g.spacing[i] > 0.0);
    REQUIRE(!g.points[i].at_infinity);
    // pullback coordinate matches the stored sphere point
    REQUIRE(chordal_distance(stereo_project(g.points[i]), g.sphere_points[i]) < 1e-12);
  }
  // equal arc-length cells on the great circle
  for (std::size_t i = 1; i < g.size(); ++i)
    REQUIRE(std::abs(g.spacing[i] - g.spacing[0]) < 1e-15);
}

TEST_CASE("disk grids cover the area with ring-sector cells") {
  const Grid g = build_grid(Domain::disk(0.5, -0.25, 2.0), 1000);
  REQUIRE(g.size() == 1000);
  REQUIRE(!g.one_dimensional);
  double area = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    area += g.cell_measure[i];
    REQUIRE(g.domain.contains(g.points[i]));
  }
  REQUIRE(std::abs(area - 3.14159265358979323846 * 4.0) < 1e-9);
}

TEST_CASE("sphere cap grids use surface measure") {
  const double pi = 3.14159265358979323846;
  const Grid g = build_grid(Domain::cap(0.0, pi), 2000);
  double area = 0.0;
  for (double a : g.cell_measure) area += a;
  REQUIRE(std::abs(area - pi) < 1e-9);  // 4 pi r^2 with r = 1/2
}

TEST_CASE("pole exclusion drops the last ring of the line grid") {
  const Grid inc = build_grid(Domain::real_line(), 100, PoleTruncation::cap_include);
  const Grid exc = build_grid(Domain::real_line(), 100, PoleTruncation::cap_exclude);
  double max_inc = 0.0, max_exc = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    max_inc = std::max(max_inc, std::abs(inc.points[i].re));
    max_exc = std::max(max_exc, std::abs(exc.points[i].re));
  }
  REQUIRE(max_exc < max_inc);
}
