#pragma once

// Discrete measures on either chart, logarithmic potentials and energies with
// cell-corrected diagonals, pushforward along the stereographic lift, and the
// bounded-Lipschitz metric.
//
// Energy convention for grid measures: the off-diagonal part is the midpoint
// rule and each cell contributes its exact self-energy for a uniform density,
//   1D:  m^2 (log(1/h) + 3/2),
//   2D:  m^2 (log(1/h) + c2),  h = sqrt(cell area),
// so grid_energy is the energy of the piecewise-uniform density the measure
// represents, first-order accurate in h.  grid_potential_at_nodes uses the
// matching cell-averaged self term, which makes it exactly half the gradient
// of the quadratic energy form (the convention the equilibrium KKT residuals
// rely on).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <thread>
#include <utility>
#include <vector>

#include "coulomb/common.hpp"
#include "coulomb/geometry.hpp"
#include "coulomb/quadrature.hpp"
#include "coulomb/weights.hpp"

namespace coulomb {

namespace detail {

// Row-parallel loop with a deterministic output contract: each row writes only
// its own slot, so the result is identical for every thread count.
inline void parallel_rows(std::size_t n, const std::function<void(std::size_t)>& row) {
  unsigned tc = thread_cap();
  if (tc == 0) tc = std::max(1u, std::thread::hardware_concurrency());
  if (tc <= 1 || n < 128) {
    for (std::size_t i = 0; i < n; ++i) row(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(tc, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &row] {
      for (std::size_t i = lo; i < hi; ++i) row(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

struct DiscreteMeasure {
  Chart chart = Chart::plane;
  bool one_dimensional = true;
  std::vector<PlanePoint> points;  // pullback coordinates on either chart
  std::vector<double> mass;
  std::vector<double> cell_width;  // empty for atomic measures

  std::size_t size() const { return points.size(); }
  bool is_grid() const { return !cell_width.empty(); }
  double total_mass() const { return stable_sum(mass); }
  bool is_probability() const { return std::abs(total_mass() - 1.0) <= 1e-10; }

  SpherePoint sphere_point(std::size_t i) const {
    require(chart == Chart::sphere, errc::contract, "sphere_point on a plane-chart measure");
    return stereo_project(points[i]);
  }

  void validate() const {
    require(mass.size() == points.size(), errc::contract, "measure: mass/support size mismatch");
    require(cell_width.empty() || cell_width.size() == points.size(), errc::contract,
            "measure: cell_width size mismatch");
    for (double m : mass) require(m >= 0.0, errc::contract, "measure: negative mass");
    for (double h : cell_width) require(h > 0.0, errc::contract, "measure: nonpositive cell width");
  }

  static DiscreteMeasure from_grid(const Grid& g, std::vector<double> m) {
    require(m.size() == g.size(), errc::contract, "from_grid: mass size mismatch");
    DiscreteMeasure mu;
    mu.chart = g.chart;
    mu.one_dimensional = g.one_dimensional;
    mu.points = g.points;
    mu.mass = std::move(m);
    mu.cell_width = g.spacing;
    mu.validate();
    return mu;
  }

  static DiscreteMeasure atoms(Chart c, std::vector<PlanePoint> pts, std::vector<double> m) {
    DiscreteMeasure mu;
    mu.chart = c;
    mu.points = std::move(pts);
    mu.mass = std::move(m);
    mu.one_dimensional = true;
    for (const auto& p : mu.points)
      if (p.im != 0.0) mu.one_dimensional = false;
    mu.validate();
    return mu;
  }

  static DiscreteMeasure dirac(Chart c, const PlanePoint& p) { return atoms(c, {p}, {1.0}); }
};

// k-point configuration with implicit masses 1/k.
struct EmpiricalMeasure {
  Chart chart = Chart::plane;
  std::vector<PlanePoint> points;

  DiscreteMeasure as_measure() const {
    require(!points.empty(), errc::contract, "empirical measure needs k >= 1");
    return DiscreteMeasure::atoms(chart, points,
                                  std::vector<double>(points.size(), 1.0 / points.size()));
  }
};

// Distance in the chart's own metric; the plane chart sees the infinity
// marker at infinite distance from every finite point.
inline double chart_distance(Chart c, const PlanePoint& a, const PlanePoint& b) {
  if (c == Chart::sphere) return chordal_distance(a, b);
  if (a.at_infinity || b.at_infinity) return (a.at_infinity && b.at_infinity) ? 0.0 : kInf;
  const double dr = a.re - b.re, di = a.im - b.im;
  return std::sqrt(dr * dr + di * di);
}

// Exact self-energy constant of the log kernel over a unit square,
// int_{[0,1]^2 x [0,1]^2} log(1/|x-y|) = c2; computed once by tensor
// Gauss-Legendre quadrature of the tent-function reduction.
inline double cell_constant_2d() {
  static const double c2 = [] {
    const QuadratureRule gl = on_interval(gauss_legendre(64), 0.0, 1.0);
    accumulator acc;
    for (std::size_t a = 0; a < gl.nodes.size(); ++a)
      for (std::size_t b = 0; b < gl.nodes.size(); ++b) {
        const double u = gl.nodes[a], v = gl.nodes[b];
        const double r2 = u * u + v * v;
        acc.add(gl.weights[a] * gl.weights[b] * (1.0 - u) * (1.0 - v) * (-0.5) * std::log(r2) *
                4.0);
      }
    return acc.value();
  }();
  return c2;
}

inline double diag_constant(bool one_dimensional) {
  return one_dimensional ? 1.5 : cell_constant_2d();
}

// U^mu(z) = sum_j m_j log(1/|z - t_j|); +inf when z sits on a charged atom.
// The finite-log-moment precondition fails exactly when a plane-chart measure
// charges the infinity marker.
inline double potential(const DiscreteMeasure& mu, const PlanePoint& z) {
  if (mu.chart == Chart::plane) {
    for (std::size_t j = 0; j < mu.size(); ++j)
      require(!(mu.points[j].at_infinity && mu.mass[j] > 0.0), errc::unbounded_potential,
              "potential: measure charges the infinity marker (log-moment diverges)");
    require(!z.at_infinity, errc::unbounded_potential,
            "potential: evaluation at infinity diverges on the plane chart");
  }
  accumulator acc;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu.mass[j] == 0.0) continue;
    const double d = chart_distance(mu.chart, z, mu.points[j]);
    if (d == 0.0) return kInf;
    acc.add(-mu.mass[j] * std::log(d));
  }
  return acc.value();
}

// Cell-averaged potential at the measure's own nodes: off-diagonal midpoint
// terms plus the self term m_i (log(1/h_i) + c); equals (A m)_i for the energy
// matrix, i.e. half the gradient of m^T A m.
inline std::vector<double> grid_potential_at_nodes(const DiscreteMeasure& mu) {
  require(mu.is_grid(), errc::contract, "grid_potential_at_nodes needs cell widths");
  const double cc = diag_constant(mu.one_dimensional);
  const std::size_t n = mu.size();
  std::vector<double> out(n);
  detail::parallel_rows(n, [&](std::size_t i) {
    accumulator acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = chart_distance(mu.chart, mu.points[i], mu.points[j]);
      require(d > 0.0, errc::singular_configuration, "grid has coincident nodes");
      acc.add(-mu.mass[j] * std::log(d));
    }
    acc.add(mu.mass[i] * (-std::log(mu.cell_width[i]) + cc));
    out[i] = acc.value();
  });
  return out;
}

// sum_{i != j} m_i m_j log(1/|x_i - x_j|), the pair-interaction part only.
inline double interaction_energy(Chart chart, const std::vector<PlanePoint>& pts,
                                 const std::vector<double>& mass) {
  require(pts.size() == mass.size(), errc::contract, "interaction_energy: size mismatch");
  if (chart == Chart::plane)
    for (const auto& p : pts)
      require(!p.at_infinity, errc::unbounded_potential,
              "interaction_energy: infinity marker on the plane chart");
  const std::size_t n = pts.size();
  std::vector<double> rows(n, 0.0);
  detail::parallel_rows(n, [&](std::size_t i) {
    accumulator acc;
    for (std::size_t j = 0; j < i; ++j) {
      const double d = chart_distance(chart, pts[i], pts[j]);
      require(d > 0.0, errc::singular_configuration, "interaction_energy: coincident points");
      acc.add(-mass[i] * mass[j] * std::log(d));
    }
    rows[i] = acc.value();
  });
  return 2.0 * stable_sum(rows);
}

inline double interaction_energy(const DiscreteMeasure& mu) {
  return interaction_energy(mu.chart, mu.points, mu.mass);
}

namespace detail {

// Bilinear energy form B(a, b) = sum_{i != j} a_i b_j log(1/d_ij)
//                              + sum_i a_i b_i (log(1/h_i) + c).
// a and b live on the same node set; B(m, m) is grid_energy.
inline double energy_bilinear(const DiscreteMeasure& geom, const std::vector<double>& a,
                              const std::vector<double>& b) {
  require(geom.is_grid(), errc::contract, "energy form needs cell widths");
  if (geom.chart == Chart::plane)
    for (const auto& p : geom.points)
      require(!p.at_infinity, errc::unbounded_potential,
              "energy: infinity marker on the plane chart");
  const double cc = diag_constant(geom.one_dimensional);
  const std::size_t n = geom.size();
  std::vector<double> rows(n, 0.0);
  detail::parallel_rows(n, [&](std::size_t i) {
    accumulator acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = chart_distance(geom.chart, geom.points[i], geom.points[j]);
      require(d > 0.0, errc::singular_configuration, "energy: coincident grid nodes");
      acc.add(-b[j] * std::log(d));
    }
    acc.add(b[i] * (-std::log(geom.cell_width[i]) + cc));
    rows[i] = a[i] * acc.value();
  });
  return stable_sum(rows);
}

}  // namespace detail

// Cell-corrected quadratic energy of a grid measure; approximates I(mu) of
// the piecewise-uniform density at first order in the mesh.
inline double grid_energy(const DiscreteMeasure& mu) {
  require(mu.is_grid(), errc::contract, "grid_energy needs cell widths (atomic I(mu) = +inf)");
  return detail::energy_bilinear(mu, mu.mass, mu.mass);
}

// Bilinear extension on a shared node set (used by the positivity test:
// E(a - b) = B(a,a) - 2B(a,b) + B(b,b) >= 0).
inline double grid_energy_bilinear(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require(mu.size() == nu.size(), errc::contract, "bilinear energy: node sets differ");
  require(mu.chart == nu.chart, errc::contract, "bilinear energy: charts differ");
  for (std::size_t i = 0; i < mu.size(); ++i)
    require(mu.points[i] == nu.points[i], errc::contract, "bilinear energy: node sets differ");
  return detail::energy_bilinear(mu, mu.mass, nu.mass);
}

// Sphere-side value of the weight at a node of a sphere-chart measure.
inline double sphere_weight_value(const WeightSpec& w, const PlanePoint& p) {
  if (p.at_infinity) {
    if (w.kind == WeightKind::tabulated) return w.pole_value;
    const AdmissibilityReport rep = classify_admissibility(w, Domain::plane());
    return std::isfinite(rep.M_estimate) ? rep.M_estimate : kInf;
  }
  return eval_weight(w, p) - 0.5 * std::log1p(p.abs2());
}

// I^Q(mu) with explicit node-aligned field values (already sphere-side for
// sphere-chart measures): grid energy plus 2 int Q dmu; +inf as soon as mu
// charges {Q = +inf}.
inline double weighted_energy(const DiscreteMeasure& mu, const std::vector<double>& q) {
  require(q.size() == mu.size(), errc::contract, "weighted_energy: field size mismatch");
  accumulator lin;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    require(q[i] > -kInf, errc::contract, "weighted_energy: field value -infinity");
    if (mu.mass[i] > 0.0) {
      if (q[i] == kInf) return kInf;
      lin.add(mu.mass[i] * q[i]);
    }
  }
  return grid_energy(mu) + 2.0 * lin.value();
}

inline double weighted_energy(const DiscreteMeasure& mu, const WeightSpec& w) {
  std::vector<double> q(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    q[i] = mu.chart == Chart::sphere ? sphere_weight_value(w, mu.points[i])
                                     : eval_weight(w, mu.points[i]);
  return weighted_energy(mu, q);
}

// ---------------------------------------------------------------------------
// Pushforward along the stereographic lift

enum class PushDirection { to_sphere, to_plane };

// Pullback coordinates are shared by both charts, so only the chart tag and
// the metric scale of the cell widths change: chordal lengths contract by
// 1/(1 + |x|^2) going up and expand by the same factor coming down, which
// keeps the two energy computations in exact agreement.
inline DiscreteMeasure pushforward(const DiscreteMeasure& mu, PushDirection dir) {
  DiscreteMeasure out = mu;
  if (dir == PushDirection::to_sphere) {
    require(mu.chart == Chart::plane, errc::contract, "pushforward to-sphere: already on sphere");
    out.chart = Chart::sphere;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!out.cell_width.empty()) {
        require(!mu.points[i].at_infinity, errc::contract,
                "pushforward: grid cell at the infinity marker");
        out.cell_width[i] = mu.cell_width[i] / (1.0 + mu.points[i].abs2());
      }
    }
  } else {
    require(mu.chart == Chart::sphere, errc::contract, "pushforward to-plane: already on plane");
    for (std::size_t i = 0; i < mu.size(); ++i)
      require(!(mu.points[i].at_infinity && mu.mass[i] > 0.0), errc::north_pole_mass,
              "pushforward to-plane: measure puts mass at the north pole");
    out.chart = Chart::plane;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (!out.cell_width.empty())
        out.cell_width[i] = mu.cell_width[i] * (1.0 + mu.points[i].abs2());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bounded-Lipschitz distance
//
// d_BL(mu, nu) = sup { int f d(mu - nu) : |f| <= 1, Lip(f) <= 1 }.  On the
// discrete union support this is a finite LP; its transport dual is optimal
// transport with the truncated cost min(d, 2).  Two exact solvers:
//   * collinear plane-chart supports: dynamic programming over the concave
//     piecewise-linear value function of f (the all-pairs Lipschitz
//     constraints reduce to consecutive gaps on a line),
//   * general supports: the transportation simplex on the truncated-cost LP.

namespace detail {

// Concave piecewise-linear function on an interval, stored as knots.
struct ConcavePwl {
  std::vector<double> x, y;

  void init_linear(double lo, double hi, double slope) {
    x = {lo, hi};
    y = {slope * lo, slope * hi};
  }

  void add_linear(double slope) {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] += slope * x[k];
  }

  double eval(double t) const {
    // t within [x.front(), x.back()]
    std::size_t k = std::upper_bound(x.begin(), x.end(), t) - x.begin();
    if (k == 0) return y.front();
    if (k == x.size()) return y.back();
    const double h = x[k] - x[k - 1];
    if (h <= 0.0) return std::max(y[k - 1], y[k]);
    const double s = (t - x[k - 1]) / h;
    return y[k - 1] + s * (y[k] - y[k - 1]);
  }

  // sup-convolution with the window [-g, g]: left of the peak shifts left,
  // right of the peak shifts right, the peak becomes a flat of width 2g.
  void dilate(double g) {
    if (g <= 0.0) return;
    double peak = y[0];
    for (double v : y) peak = std::max(peak, v);
    std::size_t first = 0, last = 0;
    for (std::size_t k = 0; k < y.size(); ++k)
      if (y[k] == peak) {
        last = k;
        if (y[first] != peak) first = k;
      }
    if (y[first] != peak) first = last;
    std::vector<double> nx, ny;
    nx.reserve(x.size() + 2);
    ny.reserve(y.size() + 2);
    for (std::size_t k = 0; k <= first; ++k) {
      nx.push_back(x[k] - g);
      ny.push_back(y[k]);
    }
    for (std::size_t k = last; k < x.size(); ++k) {
      nx.push_back(x[k] + g);
      ny.push_back(y[k]);
    }
    x = std::move(nx);
    y = std::move(ny);
  }

  void clip(double lo, double hi) {
    const double ylo = eval(lo), yhi = eval(hi);
    std::vector<double> nx = {lo}, ny = {ylo};
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] > lo && x[k] < hi) {
        nx.push_back(x[k]);
        ny.push_back(y[k]);
      }
    nx.push_back(hi);
    ny.push_back(yhi);
    x = std::move(nx);
    y = std::move(ny);
  }

  double maximum() const {
    double m = y[0];
    for (double v : y) m = std::max(m, v);
    return m;
  }
};

// Exact BL on a line: maximize sum c_i f(t_i) over |f| <= 1, Lip(f) <= 1.
// Items must be sorted by t; gaps may be +inf (the infinity marker), where
// the window is capped at 4 (wider than the whole box, hence vacuous).
inline double bl_line(const std::vector<double>& t, const std::vector<double>& c) {
  ConcavePwl F;
  F.init_linear(-1.0, 1.0, c[0]);
  for (std::size_t i = 1; i < t.size(); ++i) {
    double g = t[i] - t[i - 1];
    if (!(g < 4.0)) g = 4.0;
    F.dilate(g);
    F.clip(-1.0, 1.0);
    F.add_linear(c[i]);
  }
  return std::max(0.0, F.maximum());
}

// Transportation simplex, exact optimum of
//   min sum flow_ij cost(i,j),  flow >= 0, row sums = supply, col sums = demand
// with balanced totals.  Most-negative pivoting with a switch to Bland's rule
// to guarantee termination under degeneracy.
inline double transport_optimal_cost(const std::vector<double>& supply,
                                     const std::vector<double>& demand,
                                     const std::function<double(std::size_t, std::size_t)>& cost) {
  const std::size_t m = supply.size(), n = demand.size();
  require(m > 0 && n > 0, errc::contract, "transport: empty side");
  std::vector<double> C(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) C[i * n + j] = cost(i, j);

  struct Cell {
    std::size_t i, j;
    double flow;
    bool active;
  };
  std::vector<Cell> basis;
  basis.reserve(m + n);
  // Northwest-corner start.
  {
    std::vector<double> a = supply, b = demand;
    std::size_t i = 0, j = 0;
    while (i < m && j < n) {
      const double f = std::min(a[i], b[j]);
      basis.push_back({i, j, f, true});
      a[i] -= f;
      b[j] -= f;
      if (i + 1 == m && j + 1 == n) break;
      if ((a[i] <= b[j] && i + 1 < m) || j + 1 == n)
        ++i;
      else
        ++j;
    }
  }

  std::vector<double> u(m), v(n);
  std::vector<char> udone(m), vdone(n);
  std::vector<std::vector<std::size_t>> row_cells(m), col_cells(n);
  const std::size_t max_iter = 2000 + 40 * (m + n) * (m + n);
  bool bland = false;
  for (std::size_t iter = 0;; ++iter) {
    require(iter < max_iter, errc::non_convergence, "transport simplex failed to terminate");
    if (iter > 200 + 4 * (m + n)) bland = true;

    for (auto& r : row_cells) r.clear();
    for (auto& c2 : col_cells) c2.clear();
    for (std::size_t k = 0; k < basis.size(); ++k)
      if (basis[k].active) {
        row_cells[basis[k].i].push_back(k);
        col_cells[basis[k].j].push_back(k);
      }
    // Potentials over the basis tree.
    std::fill(udone.begin(), udone.end(), 0);
    std::fill(vdone.begin(), vdone.end(), 0);
    u[0] = 0.0;
    udone[0] = 1;
    std::vector<std::size_t> stack = {0};  // rows as i, cols as m + j
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node < m) {
        for (std::size_t k : row_cells[node])
          if (!vdone[basis[k].j]) {
            v[basis[k].j] = C[node * n + basis[k].j] - u[node];
            vdone[basis[k].j] = 1;
            stack.push_back(m + basis[k].j);
          }
      } else {
        const std::size_t j = node - m;
        for (std::size_t k : col_cells[j])
          if (!udone[basis[k].i]) {
            u[basis[k].i] = C[basis[k].i * n + j] - v[j];
            udone[basis[k].i] = 1;
            stack.push_back(basis[k].i);
          }
      }
    }
    require(std::all_of(udone.begin(), udone.end(), [](char d) { return d != 0; }) &&
                std::all_of(vdone.begin(), vdone.end(), [](char d) { return d != 0; }),
            errc::non_convergence, "transport: basis graph disconnected");

    // Entering variable.
    std::size_t ei = 0, ej = 0;
    double best = -1e-12;
    bool found = false;
    for (std::size_t i = 0; i < m && !(bland && found); ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double rc = C[i * n + j] - u[i] - v[j];
        if (rc < best) {
          best = rc;
          ei = i;
          ej = j;
          found = true;
          if (bland) break;
        }
      }
    if (!found) break;

    // Cycle: tree path from row ei to col ej, alternating -,+,-,... from the
    // column end; entering cell takes +theta.
    std::vector<int> parent_cell(m + n, -1);
    std::vector<char> seen(m + n, 0);
    std::vector<std::size_t> bfs = {ei};
    seen[ei] = 1;
    while (!bfs.empty()) {
      const std::size_t node = bfs.back();
      bfs.pop_back();
      if (node == m + ej) break;
      if (node < m) {
        for (std::size_t k : row_cells[node]) {
          const std::size_t nxt = m + basis[k].j;
          if (!seen[nxt]) {
            seen[nxt] = 1;
            parent_cell[nxt] = static_cast<int>(k);
            bfs.push_back(nxt);
          }
        }
      } else {
        for (std::size_t k : col_cells[node - m]) {
          const std::size_t nxt = basis[k].i;
          if (!seen[nxt]) {
            seen[nxt] = 1;
            parent_cell[nxt] = static_cast<int>(k);
            bfs.push_back(nxt);
          }
        }
      }
    }
    require(seen[m + ej], errc::non_convergence, "transport: no cycle for entering cell");
    std::vector<std::size_t> path;  // basis cells from col ej back to row ei
    for (std::size_t node = m + ej; node != ei;) {
      const std::size_t k = static_cast<std::size_t>(parent_cell[node]);
      path.push_back(k);
      const std::size_t i2 = basis[k].i, j2 = m + basis[k].j;
      node = (node == j2) ? i2 : j2;
    }
    // Odd positions (0-based even) on the path carry -theta.
    double theta = kInf;
    for (std::size_t p = 0; p < path.size(); p += 2) theta = std::min(theta, basis[path[p]].flow);
    // Leaving cell: minimal flow, smallest (i, j) on ties (anti-cycling).
    std::size_t leave = path[0];
    for (std::size_t p = 2; p < path.size(); p += 2) {
      const Cell& cand = basis[path[p]];
      const Cell& cur = basis[leave];
      if (cand.flow < cur.flow ||
          (cand.flow == cur.flow && (cand.i < cur.i || (cand.i == cur.i && cand.j < cur.j))))
        leave = path[p];
    }
    for (std::size_t p = 0; p < path.size(); ++p)
      basis[path[p]].flow += (p % 2 == 0) ? -theta : theta;
    basis[leave].active = false;
    basis.push_back({ei, ej, theta, true});
    basis.erase(std::remove_if(basis.begin(), basis.end(),
                               [](const Cell& cl) { return !cl.active; }),
                basis.end());
  }

  accumulator total;
  for (const auto& cl : basis)
    if (cl.active && cl.flow > 0.0) total.add(cl.flow * C[cl.i * n + cl.j]);
  return total.value();
}

}  // namespace detail

inline double bl_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require(mu.chart == nu.chart, errc::contract, "bl_distance: measures on different charts");
  require(mu.is_probability() && nu.is_probability(), errc::contract,
          "bl_distance: both inputs must be probability measures");

  // Signed difference on the merged support.
  struct Item {
    PlanePoint p;
    double c;
  };
  std::vector<Item> items;
  items.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) items.push_back({mu.points[i], mu.mass[i]});
  for (std::size_t i = 0; i < nu.size(); ++i) items.push_back({nu.points[i], -nu.mass[i]});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.p.at_infinity != b.p.at_infinity) return b.p.at_infinity;
    if (a.p.re != b.p.re) return a.p.re < b.p.re;
    return a.p.im < b.p.im;
  });
  std::vector<Item> merged;
  for (const auto& it : items) {
    if (!merged.empty() && merged.back().p == it.p)
      merged.back().c += it.c;
    else
      merged.push_back(it);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Item& it) { return std::abs(it.c) < 1e-300; }),
               merged.end());
  if (merged.empty()) return 0.0;

  bool line = mu.chart == Chart::plane;
  for (const auto& it : merged)
    if (it.p.im != 0.0) line = false;
  if (line) {
    std::vector<double> t(merged.size()), c(merged.size());
    for (std::size_t i = 0; i < merged.size(); ++i) {
      t[i] = merged[i].p.at_infinity ? kInf : merged[i].p.re;
      c[i] = merged[i].c;
    }
    return detail::bl_line(t, c);
  }

  require(merged.size() <= 3000, errc::unsupported,
          "bl_distance: union support too large for the exact transport solver");
  std::vector<PlanePoint> src, dst;
  std::vector<double> supply, demand;
  for (const auto& it : merged) {
    if (it.c > 0.0) {
      src.push_back(it.p);
      supply.push_back(it.c);
    } else {
      dst.push_back(it.p);
      demand.push_back(-it.c);
    }
  }
  if (src.empty() || dst.empty()) return 0.0;
  // Rebalance the fp remainder so the LP is exactly feasible.
  const double sp = stable_sum(supply), dm = stable_sum(demand);
  const double scale = sp / dm;
  for (auto& d : demand) d *= scale;
  const Chart chart = mu.chart;
  return detail::transport_optimal_cost(
      supply, demand, [&](std::size_t i, std::size_t j) {
        return std::min(chart_distance(chart, src[i], dst[j]), 2.0);
      });
}

}  // namespace coulomb
