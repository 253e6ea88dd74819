#include <catch_amalgamated.hpp>

#include <cmath>

#include "coulomb/measures.hpp"
#include "coulomb/rng.hpp"

using namespace coulomb;

namespace {

DiscreteMeasure uniform_on(const Grid& g) {
  std::vector<double> m(g.size(), 1.0 / static_cast<double>(g.size()));
  return DiscreteMeasure::from_grid(g, m);
}

}  // namespace

TEST_CASE("pair interaction energies match hand values") {
  const DiscreteMeasure two =
      DiscreteMeasure::atoms(Chart::plane, {{0.0, 0.0}, {2.0, 0.0}}, {0.5, 0.5});
  REQUIRE(std::abs(interaction_energy(two) - (-0.5 * std::log(2.0))) < 1e-15);

  const DiscreteMeasure three = DiscreteMeasure::atoms(
      Chart::plane, {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  REQUIRE(std::abs(interaction_energy(three) - (-(2.0 / 9.0) * std::log(2.0))) < 1e-15);
}

TEST_CASE("coincident atoms and the infinity marker are rejected") {
  const DiscreteMeasure dup =
      DiscreteMeasure::atoms(Chart::plane, {{1.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
  REQUIRE_THROWS_AS(interaction_energy(dup), error);
  const DiscreteMeasure inf_plane =
      DiscreteMeasure::atoms(Chart::plane, {{0.0, 0.0}, PlanePoint::infinity()}, {0.5, 0.5});
  REQUIRE_THROWS_AS(interaction_energy(inf_plane), error);
  // on the sphere chart the marker is an ordinary point (the pole)
  const DiscreteMeasure inf_sphere =
      DiscreteMeasure::atoms(Chart::sphere, {{0.0, 0.0}, PlanePoint::infinity()}, {0.5, 0.5});
  REQUIRE(std::abs(interaction_energy(inf_sphere) - (-0.5 * std::log(1.0))) < 1e-15);
}

TEST_CASE("diagonal-corrected grid energy converges at first order") {
  const double exact = 1.5 - std::log(2.0);
  const double e1 = grid_energy(uniform_on(build_grid(Domain::interval(-1.0, 1.0), 1000)));
  const double e2 = grid_energy(uniform_on(build_grid(Domain::interval(-1.0, 1.0), 2000)));
  const double r = std::abs(e1 - exact) / std::abs(e2 - exact);
  REQUIRE(std::abs(e2 - exact) < 5e-4);
  REQUIRE(r > 1.7);
  REQUIRE(r < 2.3);
}

TEST_CASE("atomic measures have no grid energy") {
  const DiscreteMeasure atoms =
      DiscreteMeasure::atoms(Chart::plane, {{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
  REQUIRE_THROWS_AS(grid_energy(atoms), error);
}

TEST_CASE("grid potential matches the closed-form uniform potential") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 2000);
  const DiscreteMeasure mu = uniform_on(g);
  const std::vector<double> U = grid_potential_at_nodes(mu);
  auto exact = [](double x) {
    return -0.5 * ((1.0 + x) * std::log(1.0 + x) + (1.0 - x) * std::log(1.0 - x) - 2.0);
  };
  for (std::size_t i : {100u, 500u, 999u, 1500u, 1899u}) {
    const double x = mu.points[i].re;
    REQUIRE(std::abs(U[i] - exact(x)) < 2e-3);
  }
}

TEST_CASE("potential at a charged atom is infinite, at distance it is the log kernel") {
  const DiscreteMeasure mu = DiscreteMeasure::dirac(Chart::plane, {0.0, 0.0});
  REQUIRE(potential(mu, {0.0, 0.0}) == kInf);
  REQUIRE(std::abs(potential(mu, {3.0, 4.0}) - std::log(1.0 / 5.0)) < 1e-15);
}

TEST_CASE("energy bilinear form is positive semidefinite on differences") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 300);
  rng_stream rng(5, 0);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> a(g.size()), b(g.size());
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
      sa += a[i];
      sb += b[i];
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    const DiscreteMeasure ma = DiscreteMeasure::from_grid(g, a);
    const DiscreteMeasure mb = DiscreteMeasure::from_grid(g, b);
    const double quad = grid_energy(ma) - 2.0 * grid_energy_bilinear(ma, mb) + grid_energy(mb);
    REQUIRE(quad > -1e-12);
  }
}

TEST_CASE("weighted energy is infinite as soon as mass charges an infinite field value") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 50);
  const DiscreteMeasure mu = uniform_on(g);
  std::vector<double> q(g.size(), 0.0);
  q[10] = kInf;
  REQUIRE(weighted_energy(mu, q) == kInf);
  std::vector<double> zero_mass = mu.mass;
  zero_mass[10] = 0.0;
  double rest = 0.0;
  for (double m : zero_mass) rest += m;
  for (double& m : zero_mass) m /= rest;
  const DiscreteMeasure nu = DiscreteMeasure::from_grid(g, zero_mass);
  REQUIRE(std::isfinite(weighted_energy(nu, q)));
}

TEST_CASE("plane and sphere grid energies agree through the lift correction") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 400);
  const DiscreteMeasure mu = uniform_on(g);
  const DiscreteMeasure lifted = pushforward(mu, PushDirection::to_sphere);
  double corr = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    corr += mu.mass[i] * 0.5 * std::log1p(mu.points[i].abs2());
  REQUIRE(std::abs(grid_energy(lifted) - (grid_energy(mu) + 2.0 * corr)) < 1e-12);
}

TEST_CASE("pushforward round-trips masses and cell widths") {
  const Grid g = build_grid(Domain::real_line(), 300);
  const DiscreteMeasure mu = uniform_on(g);
  const DiscreteMeasure down = pushforward(mu, PushDirection::to_plane);
  const DiscreteMeasure up = pushforward(down, PushDirection::to_sphere);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    REQUIRE(mu.mass[i] == up.mass[i]);
    REQUIRE(std::abs(mu.cell_width[i] - up.cell_width[i]) <
            1e-12 * std::max(1.0, mu.cell_width[i]));
  }
}

TEST_CASE("mass at the pole cannot be pushed down to the plane") {
  const DiscreteMeasure mu =
      DiscreteMeasure::atoms(Chart::sphere, {{0.0, 0.0}, PlanePoint::infinity()}, {0.5, 0.5});
  REQUIRE_THROWS_AS(pushforward(mu, PushDirection::to_plane), error);
}

TEST_CASE("chart distance switches between euclidean and chordal metrics") {
  const PlanePoint a{0.0, 0.0}, b{3.0, 4.0};
  REQUIRE(chart_distance(Chart::plane, a, b) == 5.0);
  REQUIRE(std::abs(chart_distance(Chart::sphere, a, b) -
                   5.0 / std::sqrt(26.0)) < 1e-15);
  REQUIRE(chart_distance(Chart::plane, a, PlanePoint::infinity()) == kInf);
  REQUIRE(chart_distance(Chart::sphere, a, PlanePoint::infinity()) == 1.0);
}
