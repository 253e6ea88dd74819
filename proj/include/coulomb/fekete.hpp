#pragma once

// Weighted Vandermonde products in log domain, Fekete point search over grid
// node subsets, and the k(k-1)-root diameters delta_k.
//
// The search is combinatorial on purpose: Leja greedy seeding followed by
// pairwise exchange makes "no single swap improves the product" a certifiable
// termination condition, and restarts guard against poor local optima.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "coulomb/common.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/geometry.hpp"
#include "coulomb/measures.hpp"
#include "coulomb/rng.hpp"
#include "coulomb/weights.hpp"

namespace coulomb {

struct FeketeResult {
  std::vector<PlanePoint> points;
  double log_vdm_q = -kInf;
  double delta_k = 0.0;       // exp(2 log_vdm_q / (k(k-1)))
  std::string method = "grid-exchange";
  std::size_t exchanges = 0;
};

// sum_{i<j} log|x_i - x_j| - (k-1) sum_j Q(x_j), with a -infinity sentinel
// (not an error) on coincident points or Q = +infinity, so search proposals
// degrade gracefully.  Pairs are iterated in sorted point order, which makes
// the value exactly permutation invariant.
inline double log_vdm_weighted(Chart chart, std::vector<PlanePoint> pts, const WeightSpec& w) {
  const std::size_t k = pts.size();
  require(k >= 2, errc::contract, "log_vdm_weighted needs k >= 2 points");
  std::sort(pts.begin(), pts.end(), [](const PlanePoint& a, const PlanePoint& b) {
    if (a.at_infinity != b.at_infinity) return b.at_infinity;
    if (a.re != b.re) return a.re < b.re;
    return a.im < b.im;
  });
  accumulator acc;
  for (const auto& p : pts) {
    if (chart == Chart::plane && p.at_infinity) return -kInf;
    const double q = chart == Chart::sphere ? sphere_weight_value(w, p) : eval_weight(w, p);
    if (q == kInf) return -kInf;
    acc.add(-static_cast<double>(k - 1) * q);
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double d = chart_distance(chart, pts[i], pts[j]);
      if (d == 0.0) return -kInf;
      acc.add(std::log(d));
    }
  return acc.value();
}

// Endpoint-inclusive equispaced lattice for interval domains: the natural
// candidate set for Fekete search (extreme points are attained at endpoints,
// which midpoint-cell grids exclude).
inline Grid fekete_lattice(const Domain& d, std::size_t m) {
  require(d.kind == DomainKind::interval, errc::config, "fekete_lattice: interval domains only");
  require(m >= 2, errc::config, "fekete_lattice: need at least 2 nodes");
  Grid g;
  g.chart = Chart::plane;
  g.domain = d;
  g.one_dimensional = true;
  const double h = (d.b - d.a) / static_cast<double>(m - 1);
  g.points.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = i + 1 == m ? d.b : d.a + h * static_cast<double>(i);
    g.points.push_back({x, 0.0, false});
    g.cell_measure.push_back(h);
    g.spacing.push_back(h);
  }
  return g;
}

namespace detail {

struct ExchangeState {
  std::vector<std::size_t> chosen;  // k grid node indices
  double log_vdm = -kInf;
  std::size_t exchanges = 0;
};

// Pairwise-exchange local search from a given initial subset; terminates when
// no single swap (chosen point vs unchosen node) improves the product.
inline ExchangeState exchange_optimize(const Grid& grid, const std::vector<double>& qv,
                                       const std::vector<char>& feasible,
                                       std::vector<std::size_t> init, std::size_t max_sweeps) {
  const std::size_t n = grid.size(), k = init.size();
  const double km1 = static_cast<double>(k - 1);
  auto ld = [&](std::size_t a, std::size_t b) {
    return std::log(chart_distance(grid.chart, grid.points[a], grid.points[b]));
  };

  ExchangeState st;
  st.chosen = std::move(init);
  std::vector<char> in_set(n, 0);
  for (std::size_t c : st.chosen) in_set[c] = 1;

  // P_a = sum_{b != a} log d(C_a, C_b)
  std::vector<double> P(k, 0.0);
  auto rebuild = [&] {
    for (std::size_t a = 0; a < k; ++a) {
      accumulator acc;
      for (std::size_t b = 0; b < k; ++b)
        if (b != a) acc.add(ld(st.chosen[a], st.chosen[b]));
      P[a] = acc.value();
    }
  };
  rebuild();

  std::vector<double> dist_to_chosen(k);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double best_gain = 1e-11;
    std::size_t best_a = k, best_c = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (in_set[c] || !feasible[c]) continue;
      accumulator dacc;
      for (std::size_t a = 0; a < k; ++a) {
        dist_to_chosen[a] = ld(c, st.chosen[a]);
        dacc.add(dist_to_chosen[a]);
      }
      const double D = dacc.value();
      for (std::size_t a = 0; a < k; ++a) {
        const double gain = (D - dist_to_chosen[a] - km1 * qv[c]) - (P[a] - km1 * qv[st.chosen[a]]);
        if (gain > best_gain) {
          best_gain = gain;
          best_a = a;
          best_c = c;
        }
      }
    }
    if (best_a == k) break;  // local optimality certified by the full scan
    in_set[st.chosen[best_a]] = 0;
    in_set[best_c] = 1;
    st.chosen[best_a] = best_c;
    ++st.exchanges;
    rebuild();
  }

  accumulator lv;
  for (std::size_t a = 0; a < k; ++a) {
    lv.add(0.5 * P[a]);  // each pair counted twice across P
    lv.add(-km1 * qv[st.chosen[a]]);
  }
  st.log_vdm = lv.value();
  return st;
}

inline std::vector<std::size_t> leja_seed(const Grid& grid, const std::vector<double>& qv,
                                          const std::vector<char>& feasible, std::size_t k) {
  const std::size_t n = grid.size();
  const double km1 = static_cast<double>(k - 1);
  std::vector<std::size_t> chosen;
  std::vector<char> in_set(n, 0);
  std::vector<double> partial(n, 0.0);  // sum over chosen of log d(node, chosen)
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = n;
    double best_val = -kInf;
    for (std::size_t c = 0; c < n; ++c) {
      if (in_set[c] || !feasible[c]) continue;
      const double val = partial[c] - km1 * qv[c];
      if (val > best_val) {
        best_val = val;
        best = c;
      }
    }
    require(best < n, errc::admissibility, "infeasible: fewer candidate nodes than k");
    chosen.push_back(best);
    in_set[best] = 1;
    for (std::size_t c = 0; c < n; ++c) {
      if (in_set[c] || !feasible[c]) continue;
      partial[c] += std::log(chart_distance(grid.chart, grid.points[c], grid.points[best]));
    }
  }
  return chosen;
}

}  // namespace detail

inline FeketeResult compute_fekete(const Grid& grid, const WeightSpec& w, std::size_t k,
                                   std::size_t restarts = 2, std::uint64_t seed = 0x5eedULL) {
  require(k >= 2, errc::config, "compute_fekete: k >= 2");
  const std::size_t n = grid.size();
  std::vector<double> qv = field_on_grid(w, grid);
  std::vector<char> feasible(n, 0);
  std::size_t nfeas = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (qv[i] < kInf) {
      feasible[i] = 1;
      ++nfeas;
    }
  require(nfeas >= k, errc::admissibility, "infeasible: fewer than k nodes with Q < +infinity");

  const std::size_t runs = 1 + restarts;
  std::vector<detail::ExchangeState> results(runs);
  const std::size_t sweeps = 500;
  auto run_one = [&](std::size_t r) {
    std::vector<std::size_t> init;
    if (r == 0) {
      init = detail::leja_seed(grid, qv, feasible, k);
    } else {
      // Random k-subset of the feasible nodes.
      rng_stream rng(seed, r);
      std::vector<std::size_t> pool;
      pool.reserve(nfeas);
      for (std::size_t i = 0; i < n; ++i)
        if (feasible[i]) pool.push_back(i);
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
      }
      init.assign(pool.begin(), pool.begin() + static_cast<long>(k));
    }
    results[r] = detail::exchange_optimize(grid, qv, feasible, std::move(init), sweeps);
  };

  unsigned tc = thread_cap();
  if (tc == 0) tc = std::max(1u, std::thread::hardware_concurrency());
  if (tc <= 1 || runs == 1) {
    for (std::size_t r = 0; r < runs; ++r) run_one(r);
  } else {
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(tc, runs);
    for (std::size_t t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t r = t; r < runs; r += workers) run_one(r);
      });
    for (auto& th : pool) th.join();
  }

  // Deterministic merge: best log_vdm, ties broken by lexicographic points.
  auto points_of = [&](const detail::ExchangeState& st) {
    std::vector<PlanePoint> pts;
    pts.reserve(k);
    for (std::size_t c : st.chosen) pts.push_back(grid.points[c]);
    std::sort(pts.begin(), pts.end(), [](const PlanePoint& a, const PlanePoint& b) {
      if (a.re != b.re) return a.re < b.re;
      return a.im < b.im;
    });
    return pts;
  };
  std::size_t best = 0;
  std::vector<PlanePoint> best_pts = points_of(results[0]);
  for (std::size_t r = 1; r < runs; ++r) {
    std::vector<PlanePoint> pts = points_of(results[r]);
    bool better = results[r].log_vdm > results[best].log_vdm + 1e-12;
    if (!better && std::abs(results[r].log_vdm - results[best].log_vdm) <= 1e-12) {
      for (std::size_t i = 0; i < k; ++i) {
        if (pts[i].re != best_pts[i].re) {
          better = pts[i].re < best_pts[i].re;
          break;
        }
        if (pts[i].im != best_pts[i].im) {
          better = pts[i].im < best_pts[i].im;
          break;
        }
      }
    }
    if (better) {
      best = r;
      best_pts = std::move(pts);
    }
  }

  FeketeResult res;
  res.points = best_pts;
  res.log_vdm_q = log_vdm_weighted(grid.chart, res.points, w);
  res.delta_k = std::exp(2.0 * res.log_vdm_q / (static_cast<double>(k) * (k - 1)));
  res.method = "grid-exchange";
  res.exchanges = 0;
  for (const auto& st : results) res.exchanges += st.exchanges;
  return res;
}

struct DeltaRow {
  std::size_t k = 0;
  double delta_k = 0.0;
  double vdm_rate = 0.0;  // 2 log_vdm_q / (k(k-1)), so delta_k = exp(vdm_rate)
  double bl_to_equilibrium = kNaN;
};

struct DeltaStudy {
  std::vector<DeltaRow> rows;
  double target_delta = kNaN;  // exp(-V_w)
};

// delta_k trend toward exp(-V_w) plus convergence of the Fekete empirical
// measures to the equilibrium measure.
inline DeltaStudy delta_limit_study(const Grid& grid, const WeightSpec& w,
                                    const std::vector<std::size_t>& k_list,
                                    const EquilibriumResult& eq, std::size_t restarts = 2) {
  for (std::size_t i = 1; i < k_list.size(); ++i)
    require(k_list[i] > k_list[i - 1], errc::contract, "delta_limit_study: k_list must increase");
  DeltaStudy study;
  study.target_delta = std::exp(-eq.V_w);
  for (std::size_t k : k_list) {
    const FeketeResult f = compute_fekete(grid, w, k, restarts);
    DeltaRow row;
    row.k = k;
    row.delta_k = f.delta_k;
    row.vdm_rate = 2.0 * f.log_vdm_q / (static_cast<double>(k) * (k - 1));
    EmpiricalMeasure emp;
    emp.chart = eq.measure.chart;
    emp.points = f.points;  // pullback coordinates are chart-agnostic
    row.bl_to_equilibrium = bl_distance(emp.as_measure(), eq.measure);
    study.rows.push_back(row);
  }
  return study;
}

}  // namespace coulomb
