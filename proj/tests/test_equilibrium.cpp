#include <catch_amalgamated.hpp>

#include <cmath>

#include "coulomb/equilibrium.hpp"
#include "coulomb/rng.hpp"

using namespace coulomb;

namespace {

double cdf_error_vs(const DiscreteMeasure& mu, double (*cdf)(double)) {
  // cumulative mass in x-order, probed at midpoints between consecutive nodes
  std::vector<std::size_t> idx(mu.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return mu.points[a].re < mu.points[b].re;
  });
  double acc = 0.0, worst = 0.0;
  for (std::size_t r = 0; r + 1 < idx.size(); ++r) {
    acc += mu.mass[idx[r]];
    const double edge = 0.5 * (mu.points[idx[r]].re + mu.points[idx[r + 1]].re);
    worst = std::max(worst, std::abs(acc - cdf(edge)));
  }
  return worst;
}

double arcsine_cdf(double x) {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 + std::asin(x) / kPi;
}

double cauchy_cdf(double x) { return 0.5 + std::atan(x) / kPi; }

}  // namespace

TEST_CASE("unweighted interval equilibrium is the arcsine law") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 800);
  const EquilibriumResult eq = solve_equilibrium(g, WeightSpec::zero(), 1e-9, 400000);
  REQUIRE(eq.converged);
  REQUIRE(std::abs(eq.V_w - std::log(2.0)) < 2e-3);
  REQUIRE(std::abs(eq.F_w - std::log(2.0)) < 2e-3);
  REQUIRE(cdf_error_vs(eq.measure, &arcsine_cdf) < 5e-3);
  // full support and symmetric mass
  std::size_t on = 0;
  for (char c : eq.support_mask) on += (c != 0);
  REQUIRE(on == g.size());
  const std::size_t n = eq.measure.size();
  for (std::size_t i : {0u, 50u, 200u})
    REQUIRE(std::abs(eq.measure.mass[i] - eq.measure.mass[n - 1 - i]) < 1e-6);
}

TEST_CASE("frostman conditions certify the minimizer") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 400);
  const EquilibriumResult eq = solve_equilibrium(g, WeightSpec::zero(), 1e-9, 400000);
  const FrostmanReport rep = frostman_report(eq, WeightSpec::zero(), g);
  REQUIRE(rep.max_violation_on_support < 5e-4);
  REQUIRE(rep.max_violation_off_support < 5e-4);
  REQUIRE(std::abs(rep.F_w - eq.F_w) < 1e-12);
  REQUIRE(rep.residual.size() == g.size());
}

TEST_CASE("the minimizer is independent of the starting point") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 300);
  EquilibriumOptions a;
  a.tol = 1e-10;
  a.max_iter = 400000;
  EquilibriumOptions b = a;
  b.init_mass.assign(g.size(), 0.0);
  // lopsided start: all mass in the left half
  for (std::size_t i = 0; i < g.size() / 2; ++i) b.init_mass[i] = 1.0;
  const EquilibriumResult ra = solve_equilibrium(g, WeightSpec::zero(), a);
  const EquilibriumResult rb = solve_equilibrium(g, WeightSpec::zero(), b);
  REQUIRE(std::abs(ra.V_w - rb.V_w) < 1e-9);
  REQUIRE(bl_distance(ra.measure, rb.measure) < 1e-4);
}

TEST_CASE("gaussian weight on the line reproduces the scaled semicircle constants") {
  const Grid g = build_grid(Domain::interval(-1.5, 1.5), 900);
  const EquilibriumResult eq = solve_equilibrium(g, WeightSpec::gaussian(1.0), 1e-9, 600000);
  REQUIRE(eq.converged);
  REQUIRE(std::abs(eq.V_w - (std::log(2.0) + 0.75)) < 3e-3);
  REQUIRE(std::abs(eq.F_w - (std::log(2.0) + 0.5)) < 3e-3);
  // support is [-1, 1] up to grid resolution
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (eq.support_mask[i]) {
      lo = std::min(lo, eq.measure.points[i].re);
      hi = std::max(hi, eq.measure.points[i].re);
    }
  }
  REQUIRE(std::abs(lo + 1.0) < 0.02);
  REQUIRE(std::abs(hi - 1.0) < 0.02);
}

TEST_CASE("spherically symmetric log weight balances to the cauchy law") {
  const Grid g = build_grid(Domain::real_line(), 1200);
  const EquilibriumResult eq =
      solve_equilibrium(g, WeightSpec::quadratic_log(1.0), 1e-9, 600000);
  REQUIRE(eq.converged);
  REQUIRE(std::abs(eq.V_w - std::log(2.0)) < 5e-3);
  REQUIRE(std::abs(eq.F_w - 0.0) < 5e-3);
  REQUIRE(eq.measure.chart == Chart::plane);
  REQUIRE(cdf_error_vs(eq.measure, &cauchy_cdf) < 1e-2);
}

TEST_CASE("laguerre weight on the half line concentrates on a bounded band") {
  const Grid g = build_grid(Domain::half_line(), 900);
  const EquilibriumResult eq =
      solve_equilibrium(g, WeightSpec::laguerre(1.0, 0.5), 1e-8, 600000);
  REQUIRE(eq.converged);
  // Marchenko-Pastur-type support: bounded away from far field
  double hi = 0.0, mass_tail = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (eq.support_mask[i]) hi = std::max(hi, eq.measure.points[i].re);
    if (eq.measure.points[i].re > 10.0) mass_tail += eq.measure.mass[i];
  }
  REQUIRE(hi < 10.0);
  REQUIRE(mass_tail < 1e-8);
  REQUIRE(std::isfinite(eq.V_w));
}

TEST_CASE("forcing the sphere route changes nothing for a bounded domain") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 300);
  EquilibriumOptions direct;
  direct.tol = 1e-9;
  direct.max_iter = 400000;
  EquilibriumOptions via = direct;
  via.via_sphere = true;
  const EquilibriumResult a = solve_equilibrium(g, WeightSpec::zero(), direct);
  const EquilibriumResult b = solve_equilibrium(g, WeightSpec::zero(), via);
  REQUIRE(std::abs(a.V_w - b.V_w) < 1e-6);
  REQUIRE(bl_distance(a.measure, b.measure) < 1e-3);
}

TEST_CASE("potential-matching recovers classical targets") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 500);
  std::vector<double> m(g.size(), 1.0 / static_cast<double>(g.size()));
  const DiscreteMeasure uniform = DiscreteMeasure::from_grid(g, m);
  EquilibriumOptions opts;
  opts.tol = 1e-9;
  opts.max_iter = 600000;
  const EquilibriumResult rec = neg_potential_roundtrip(uniform, g, opts);
  REQUIRE(rec.converged);
  REQUIRE(bl_distance(rec.measure, uniform) < 1e-2);
}

TEST_CASE("fewer than two finite-field nodes is not a solvable problem") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 40);
  std::vector<PlanePoint> pts = g.points;
  std::vector<double> vals(g.size(), kInf);
  vals[7] = 0.0;  // exactly one feasible node
  const WeightSpec w = WeightSpec::tabulated(pts, vals);
  bool threw = false;
  try {
    solve_equilibrium(g, w, 1e-8, 1000);
  } catch (const error& e) {
    threw = true;
    REQUIRE(e.kind() == errc::admissibility);
  }
  REQUIRE(threw);
}

TEST_CASE("nodes with infinite field carry exactly zero mass") {
  const Grid g = build_grid(Domain::interval(-1.0, 1.0), 80);
  std::vector<PlanePoint> pts = g.points;
  std::vector<double> vals(g.size(), 0.0);
  vals[0] = kInf;
  vals[41] = kInf;
  const WeightSpec w = WeightSpec::tabulated(pts, vals);
  const EquilibriumResult eq = solve_equilibrium(g, w, 1e-8, 200000);
  REQUIRE(eq.measure.mass[0] == 0.0);
  REQUIRE(eq.measure.mass[41] == 0.0);
  REQUIRE(std::isfinite(eq.V_w));
}
