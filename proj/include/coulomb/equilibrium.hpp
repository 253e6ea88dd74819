#pragma once

// Weighted equilibrium measures by simplex-constrained quadratic minimization.
//
// Discretized problem: minimize  m^T A m + 2 q^T m  over the probability
// simplex, where A is the cell-corrected log kernel of the grid and q the
// field values at the nodes (sphere-side values when solving on the sphere).
// The minimizer is the grid equilibrium measure; the KKT multiplier is the
// Robin constant F_w, and U + Q - F_w are the Frostman residuals.
//
// Two phases share one certificate: pairwise Frank-Wolfe drives the duality
// gap down globally (the gap bounds the energy suboptimality directly), then
// an active-set KKT polish solves the equality-constrained system on the
// working support to push the gap below tol.  Unbounded plane domains are
// solved on the sphere chart and pulled back, with F_w shifted by
// -(1/2) int log(1+|t|^2) dmu.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coulomb/common.hpp"
#include "coulomb/geometry.hpp"
#include "coulomb/measures.hpp"
#include "coulomb/weights.hpp"

namespace coulomb {

struct EquilibriumOptions {
  double tol = 1e-8;               // Frank-Wolfe gap target (energy suboptimality bound)
  std::size_t max_iter = 200000;
  double support_threshold = 1e-6; // support mask: mass > threshold * max mass
  bool via_sphere = false;         // force the sphere route for a bounded plane grid
  std::vector<double> init_mass;   // optional feasible start (empty = uniform)
};

struct EquilibriumResult {
  DiscreteMeasure measure;         // plane chart whenever the domain lives in the plane
  DiscreteMeasure solver_measure;  // the minimizer on the chart it was computed on
  double V_w = kNaN;               // minimal weighted energy
  double F_w = kNaN;               // Robin constant, V_w - int Q dmu
  std::vector<char> support_mask;
  double frostman_max_violation_on_support = kNaN;   // max |U+Q-F_w| on support
  double frostman_max_violation_off_support = kNaN;  // max (F_w - U - Q)_+ off support
  std::size_t iterations = 0;
  bool converged = false;
  double fw_gap = kNaN;            // final certified gap
};

namespace detail {

// Cell-corrected kernel A over a fixed node geometry; dense-cached for
// moderate n, recomputed per entry above that.
struct EnergyKernel {
  const DiscreteMeasure* geom = nullptr;
  double cdiag = 1.5;
  std::vector<double> cache;  // n*n when small enough

  explicit EnergyKernel(const DiscreteMeasure& g) : geom(&g) {
    require(g.is_grid(), errc::contract, "equilibrium kernel needs cell widths");
    cdiag = diag_constant(g.one_dimensional);
    const std::size_t n = g.size();
    if (n <= 2600) {
      cache.assign(n * n, 0.0);
      parallel_rows(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) cache[i * n + j] = entry(i, j);
      });
    }
  }

  double entry(std::size_t i, std::size_t j) const {
    if (i == j) return -std::log(geom->cell_width[i]) + cdiag;
    const double d = chart_distance(geom->chart, geom->points[i], geom->points[j]);
    require(d > 0.0, errc::singular_configuration, "equilibrium grid has coincident nodes");
    return -std::log(d);
  }

  double at(std::size_t i, std::size_t j) const {
    return cache.empty() ? entry(i, j) : cache[i * geom->size() + j];
  }

  void column(std::size_t j, std::vector<double>& out) const {
    const std::size_t n = geom->size();
    out.resize(n);
    if (!cache.empty()) {
      for (std::size_t i = 0; i < n; ++i) out[i] = cache[i * n + j];
      return;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = entry(i, j);
  }

  void matvec(const std::vector<double>& m, std::vector<double>& out) const {
    const std::size_t n = geom->size();
    out.resize(n);
    parallel_rows(n, [&](std::size_t i) {
      accumulator acc;
      if (!cache.empty()) {
        const double* row = &cache[i * n];
        for (std::size_t j = 0; j < n; ++j)
          if (m[j] != 0.0) acc.add(row[j] * m[j]);
      } else {
        for (std::size_t j = 0; j < n; ++j)
          if (m[j] != 0.0) acc.add(entry(i, j) * m[j]);
      }
      out[i] = acc.value();
    });
  }
};

}  // namespace detail

// Field values of Q at the grid nodes, on the grid's own chart.  Index-aligned
// tabulated weights are read straight through (with the plane-to-sphere shift
// when the table holds plane-side values).
inline std::vector<double> field_on_grid(const WeightSpec& w, const Grid& grid) {
  const std::size_t n = grid.size();
  if (w.kind == WeightKind::tabulated && w.table_points.size() == n) {
    bool aligned = true;
    for (std::size_t i = 0; i < n && aligned; ++i) aligned = w.table_points[i] == grid.points[i];
    if (aligned) {
      std::vector<double> q = w.table_values;
      if (grid.chart == Chart::sphere && !w.table_is_sphere_side) {
        for (std::size_t i = 0; i < n; ++i)
          q[i] = grid.points[i].at_infinity ? w.pole_value
                                            : q[i] - 0.5 * std::log1p(grid.points[i].abs2());
      }
      require(grid.chart == Chart::sphere || !w.table_is_sphere_side, errc::contract,
              "sphere-side table used on a plane-chart grid");
      for (double v : q) require(v > -kInf, errc::contract, "field value -infinity on a node");
      return q;
    }
  }
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i)
    q[i] = grid.chart == Chart::sphere ? sphere_weight_value(w, grid.points[i])
                                       : eval_weight(w, grid.points[i]);
  for (double v : q) require(v > -kInf, errc::contract, "field value -infinity on a node");
  return q;
}

namespace detail {

struct SimplexQpOutcome {
  std::vector<double> m;
  std::vector<double> u;  // A m at the solution
  double gap = kInf;
  std::size_t iterations = 0;
  bool converged = false;
};

// Minimize m^T A m + 2 q^T m over the simplex restricted to {q_i < +inf}.
inline SimplexQpOutcome minimize_simplex_qp(const EnergyKernel& A, const std::vector<double>& q,
                                            const EquilibriumOptions& opts) {
  const std::size_t n = q.size();
  std::vector<char> feasible(n, 0);
  std::size_t nfeas = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (q[i] < kInf) {
      feasible[i] = 1;
      ++nfeas;
    }
  require(nfeas >= 2, errc::admissibility,
          "infeasible: fewer than two grid nodes with Q < +infinity");

  SimplexQpOutcome out;
  std::vector<double>& m = out.m;
  if (!opts.init_mass.empty()) {
    require(opts.init_mass.size() == n, errc::contract, "init_mass size mismatch");
    m = opts.init_mass;
    double tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      require(m[i] >= 0.0, errc::contract, "init_mass must be nonnegative");
      require(feasible[i] || m[i] == 0.0, errc::contract, "init_mass charges Q = +infinity");
      tot += m[i];
    }
    require(tot > 0.0, errc::contract, "init_mass is identically zero");
    for (auto& v : m) v /= tot;
  } else {
    m.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (feasible[i]) m[i] = 1.0 / static_cast<double>(nfeas);
  }

  std::vector<double>& u = out.u;
  A.matvec(m, u);
  std::vector<double> col_s, col_v;

  auto certify = [&](double& gap_out) {
    // gap = grad . (m - s) = 2 (sum m G - min G) with G = u + q
    double mg = 0.0, gmin = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (!feasible[i]) continue;
      const double G = u[i] + q[i];
      mg += m[i] * G;
      gmin = std::min(gmin, G);
    }
    gap_out = 2.0 * (mg - gmin);
  };

  // Phase 1: pairwise Frank-Wolfe down to a loose gap.
  const double phase_tol = std::max(opts.tol, 1e-6);
  const std::size_t fw_budget = std::min<std::size_t>(opts.max_iter, 60000);
  while (out.iterations < fw_budget) {
    std::size_t s = n, v = n;
    double gs = kInf, gv = -kInf, mg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!feasible[i]) continue;
      const double G = u[i] + q[i];
      mg += m[i] * G;
      if (G < gs) {
        gs = G;
        s = i;
      }
      if (m[i] > 0.0 && G > gv) {
        gv = G;
        v = i;
      }
    }
    out.gap = 2.0 * (mg - gs);
    if (out.gap <= phase_tol || s == v || v == n) break;
    const double dAd = A.at(s, s) + A.at(v, v) - 2.0 * A.at(s, v);
    double gamma = dAd > 0.0 ? (gv - gs) / dAd : m[v];
    gamma = std::min(gamma, m[v]);
    if (gamma <= 0.0) break;
    m[s] += gamma;
    m[v] -= gamma;
    if (m[v] < 1e-17) m[v] = 0.0;
    A.column(s, col_s);
    A.column(v, col_v);
    for (std::size_t i = 0; i < n; ++i) u[i] += gamma * (col_s[i] - col_v[i]);
    ++out.iterations;
    if (out.iterations % 4096 == 0) A.matvec(m, u);  // flush incremental drift
  }
  A.matvec(m, u);
  certify(out.gap);
  if (out.gap <= opts.tol) {
    out.converged = true;
    return out;
  }

  // Phase 2: active-set polish.  Solve the equality-constrained KKT system on
  // the working support, drop negative masses, admit the worst violators of
  // the off-support Frostman inequality, repeat.
  std::vector<std::size_t> S;
  for (std::size_t i = 0; i < n; ++i)
    if (feasible[i] && m[i] > 1e-14) S.push_back(i);
  const double admit_tol = 0.25 * opts.tol;
  for (int round = 0; round < 60 && !S.empty(); ++round) {
    const std::size_t s = S.size();
    Eigen::MatrixXd K(s + 1, s + 1);
    Eigen::VectorXd rhs(s + 1);
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = 0; b < s; ++b) K(a, b) = A.at(S[a], S[b]);
      K(a, s) = 1.0;
      K(s, a) = 1.0;
      rhs(a) = -q[S[a]];
    }
    K(s, s) = 0.0;
    rhs(s) = 1.0;
    Eigen::VectorXd sol = K.partialPivLu().solve(rhs);
    ++out.iterations;
    if (!sol.allFinite()) break;

    std::size_t worst = s;
    double worst_val = -1e-12;
    for (std::size_t a = 0; a < s; ++a)
      if (sol(a) < worst_val) {
        worst_val = sol(a);
        worst = a;
      }
    if (worst != s) {
      S.erase(S.begin() + static_cast<long>(worst));
      continue;
    }

    std::vector<double> cand(n, 0.0);
    for (std::size_t a = 0; a < s; ++a) cand[S[a]] = std::max(sol(a), 0.0);
    double tot = stable_sum(cand);
    if (!(tot > 0.0)) break;
    for (auto& v2 : cand) v2 /= tot;
    const double lambda = -sol(s);

    std::vector<double> ucand;
    A.matvec(cand, ucand);
    // Admit the most violated off-support nodes, if any.
    std::vector<std::pair<double, std::size_t>> viol;
    for (std::size_t i = 0; i < n; ++i) {
      if (!feasible[i] || cand[i] > 0.0) continue;
      const double r = ucand[i] + q[i] - lambda;
      if (r < -admit_tol) viol.push_back({r, i});
    }
    m = cand;
    u = std::move(ucand);
    if (viol.empty()) break;
    std::sort(viol.begin(), viol.end());
    const std::size_t add = std::min<std::size_t>(viol.size(), 8);
    for (std::size_t a = 0; a < add; ++a) S.push_back(viol[a].second);
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
  }

  certify(out.gap);
  out.converged = out.gap <= opts.tol;
  return out;
}

}  // namespace detail

inline EquilibriumResult solve_equilibrium(const Grid& grid, const WeightSpec& w,
                                           const EquilibriumOptions& opts = {}) {
  require(opts.tol > 0.0, errc::config, "solve_equilibrium: tol must be positive");
  require(grid.size() >= 2, errc::config, "solve_equilibrium: grid needs at least 2 nodes");

  // Solver-side geometry and field.
  DiscreteMeasure geom = DiscreteMeasure::from_grid(grid, std::vector<double>(grid.size(), 0.0));
  std::vector<double> q;
  const bool lift_bounded = opts.via_sphere && grid.chart == Chart::plane;
  if (lift_bounded) {
    geom = pushforward(geom, PushDirection::to_sphere);
    q.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) q[i] = sphere_weight_value(w, grid.points[i]);
    for (double v : q) require(v > -kInf, errc::contract, "field value -infinity on a node");
  } else {
    q = field_on_grid(w, grid);
  }

  detail::EnergyKernel A(geom);
  detail::SimplexQpOutcome qp = detail::minimize_simplex_qp(A, q, opts);

  EquilibriumResult res;
  res.iterations = qp.iterations;
  res.converged = qp.converged;
  res.fw_gap = qp.gap;

  res.solver_measure = geom;
  res.solver_measure.mass = qp.m;

  // V_w = m^T A m + 2 q^T m and F_w = sum m (u + q) = V_w - int Q dmu,
  // exact identities of the discretization.
  {
    accumulator vw, fw;
    for (std::size_t i = 0; i < qp.m.size(); ++i) {
      if (qp.m[i] == 0.0) continue;  // masses only sit where q is finite
      vw.add(qp.m[i] * (qp.u[i] + 2.0 * q[i]));
      fw.add(qp.m[i] * (qp.u[i] + q[i]));
    }
    res.V_w = vw.value();
    res.F_w = fw.value();
  }

  // Frostman residuals on the solver chart.
  const std::size_t n = qp.m.size();
  double max_mass = 0.0;
  for (double mm : qp.m) max_mass = std::max(max_mass, mm);
  res.support_mask.assign(n, 0);
  double on_v = 0.0, off_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool on = qp.m[i] > opts.support_threshold * max_mass;
    res.support_mask[i] = on ? 1 : 0;
    if (q[i] == kInf) continue;
    const double r = qp.u[i] + q[i] - res.F_w;
    if (on)
      on_v = std::max(on_v, std::abs(r));
    else
      off_v = std::max(off_v, std::max(0.0, -r));
  }
  res.frostman_max_violation_on_support = on_v;
  res.frostman_max_violation_off_support = off_v;

  // Plane-side report for plane domains solved on the sphere.
  const bool unbounded_plane_domain = grid.domain.kind == DomainKind::real_line ||
                                      grid.domain.kind == DomainKind::half_line ||
                                      grid.domain.kind == DomainKind::plane;
  if ((grid.chart == Chart::sphere && unbounded_plane_domain) || lift_bounded) {
    res.measure = pushforward(res.solver_measure, PushDirection::to_plane);
    accumulator shift;  // (1/2) int log(1+|t|^2) dmu
    for (std::size_t i = 0; i < n; ++i)
      if (res.measure.mass[i] > 0.0) shift.add(0.5 * res.measure.mass[i] * std::log1p(res.measure.points[i].abs2()));
    res.F_w -= shift.value();
  } else {
    res.measure = res.solver_measure;
  }
  return res;
}

inline EquilibriumResult solve_equilibrium(const Grid& grid, const WeightSpec& w, double tol,
                                           std::size_t max_iter) {
  EquilibriumOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return solve_equilibrium(grid, w, opts);
}

// ---------------------------------------------------------------------------

struct FrostmanReport {
  std::vector<double> residual;  // U^mu + Q - F_w at every node
  std::vector<char> support_mask;
  double max_violation_on_support = 0.0;   // max |residual| over support
  double max_violation_off_support = 0.0;  // max (F_w - U - Q)_+ off support
  double F_w = kNaN;
};

inline FrostmanReport frostman_report(const EquilibriumResult& res, const WeightSpec& w,
                                      const Grid& grid, double support_threshold = 1e-6) {
  const DiscreteMeasure& mu = res.measure;
  require(mu.size() == grid.size(), errc::contract, "frostman_report: measure/grid mismatch");
  FrostmanReport rep;
  rep.F_w = res.F_w;
  const std::vector<double> U = grid_potential_at_nodes(mu);
  double max_mass = 0.0;
  for (double mm : mu.mass) max_mass = std::max(max_mass, mm);
  rep.residual.resize(mu.size());
  rep.support_mask.assign(mu.size(), 0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double qi = mu.chart == Chart::sphere ? sphere_weight_value(w, mu.points[i])
                                                : eval_weight(w, mu.points[i]);
    rep.residual[i] = U[i] + qi - res.F_w;
    const bool on = mu.mass[i] > support_threshold * max_mass;
    rep.support_mask[i] = on ? 1 : 0;
    if (qi == kInf) continue;
    if (on)
      rep.max_violation_on_support = std::max(rep.max_violation_on_support, std::abs(rep.residual[i]));
    else
      rep.max_violation_off_support =
          std::max(rep.max_violation_off_support, std::max(0.0, -rep.residual[i]));
  }
  return rep;
}

// Solve with the field Q := -U^{mu0} tabulated on the grid.  The minimizer of
// m^T A m - 2 (A m0)^T m over the simplex is m0 itself whenever m0 is
// feasible, so the recovered measure reproduces the input.
inline EquilibriumResult neg_potential_roundtrip(const DiscreteMeasure& mu0, const Grid& grid,
                                                 const EquilibriumOptions& opts = {}) {
  require(mu0.size() == grid.size(), errc::contract, "roundtrip: measure/grid mismatch");
  require(mu0.is_grid(), errc::contract, "roundtrip: mu0 must be a grid measure");
  require(mu0.is_probability(), errc::contract, "roundtrip: mu0 must be a probability measure");
  const std::vector<double> U = grid_potential_at_nodes(mu0);
  std::vector<double> q(U.size());
  for (std::size_t i = 0; i < U.size(); ++i) {
    require(std::isfinite(U[i]), errc::contract, "roundtrip: mu0 has infinite potential");
    q[i] = -U[i];
  }
  WeightSpec w = WeightSpec::tabulated(grid.points, std::move(q));
  w.table_is_sphere_side = grid.chart == Chart::sphere;
  return solve_equilibrium(grid, w, opts);
}

}  // namespace coulomb
