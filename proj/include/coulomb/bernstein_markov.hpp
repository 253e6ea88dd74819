#pragma once

// Bernstein-Markov constants through weighted Christoffel functions, plus the
// weighted Bernstein-Walsh inequality as a sampled diagnostic.
//
// M_k is the extremal ratio  sup_nodes |p e^{-kQ}| / ||p e^{-kQ}||_{L2(nu)}
// over polynomials of degree <= k.  On the discretized set it is computed
// exactly from an orthonormal basis: factor the weighted Vandermonde
// B_ij = sqrt(nu_i) e^{-k Q(x_i)} x_i^j and take the largest row norm of the
// orthogonal factor, rescaled by the node mass.  Monomial Gram conditioning
// grows exponentially in k, so the factorization runs in extended precision
// with column pivoting and the module refuses k > 64 outright.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coulomb/common.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/geometry.hpp"
#include "coulomb/measures.hpp"
#include "coulomb/rng.hpp"
#include "coulomb/weights.hpp"

namespace coulomb {

struct BMReport {
  std::vector<int> degrees;
  std::vector<double> M_k;
  std::vector<double> M_k_kth_root;
};

namespace detail {

using MatXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct BmNodes {
  std::vector<std::size_t> index;  // grid rows kept: nu > 0 and Q < +inf
  std::vector<long double> x;      // real coordinate
  std::vector<long double> scale;  // sqrt(nu) e^{-kQ}
  std::vector<double> nu;
};

inline BmNodes bm_collect_nodes(const Grid& grid, const std::vector<double>& nu,
                                const WeightSpec& w, int k) {
  require(nu.size() == grid.size(), errc::contract, "bm: nu size mismatch");
  BmNodes out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(nu[i] > 0.0)) continue;
    const PlanePoint& p = grid.points[i];
    const double q = grid.chart == Chart::sphere ? sphere_weight_value(w, p) : eval_weight(w, p);
    if (q == kInf) continue;
    require(!p.at_infinity && p.im == 0.0, errc::unsupported,
            "bm: only real-coordinate node sets are supported");
    out.index.push_back(i);
    out.x.push_back(static_cast<long double>(p.re));
    out.scale.push_back(std::sqrt(static_cast<long double>(nu[i])) *
                        std::exp(static_cast<long double>(-static_cast<double>(k) * q)));
    out.nu.push_back(nu[i]);
  }
  return out;
}

inline MatXld bm_vandermonde(const BmNodes& nodes, int cols) {
  const std::size_t n = nodes.x.size();
  MatXld B(n, cols);
  for (std::size_t i = 0; i < n; ++i) {
    long double mono = 1.0L;
    for (int j = 0; j < cols; ++j) {
      B(i, j) = nodes.scale[i] * mono;
      mono *= nodes.x[i];
    }
  }
  return B;
}

inline MatXld thin_q(const Eigen::ColPivHouseholderQR<MatXld>& qr, std::size_t rows, int cols) {
  return qr.householderQ() * MatXld::Identity(static_cast<long>(rows), cols);
}

// Scale every column to unit norm.  The column span (and hence any projector
// diagonal computed from the thin Q) is unchanged, but the rank threshold
// stops comparing monomial columns whose magnitudes differ by dozens of
// orders, which matters on charts with nodes near the pole.
inline void equilibrate_columns(MatXld& m) {
  for (long j = 0; j < m.cols(); ++j) {
    const long double norm = m.col(j).norm();
    if (norm > 0.0L) m.col(j) /= norm;
  }
}

}  // namespace detail

// Smallest valid Bernstein-Markov constant for degree k on the discretized
// measure nu restricted to the grid.
inline double bm_constant(const Grid& grid, const std::vector<double>& nu, const WeightSpec& w,
                          int k) {
  require(k >= 0, errc::config, "bm_constant: degree must be nonnegative");
  require(k <= 64, errc::unsupported,
          "bm_constant: k > 64 refused (monomial Gram conditioning exceeds extended precision)");
  const detail::BmNodes nodes = detail::bm_collect_nodes(grid, nu, w, k);
  const int cols = k + 1;
  require(nodes.x.size() >= static_cast<std::size_t>(cols), errc::degenerate_measure,
          "bm_constant: fewer than k+1 charged nodes");

  detail::MatXld B = detail::bm_vandermonde(nodes, cols);
  detail::equilibrate_columns(B);
  Eigen::ColPivHouseholderQR<detail::MatXld> qr(B);
  qr.setThreshold(static_cast<long double>(1e-13));
  require(qr.rank() >= cols, errc::degenerate_measure,
          "bm_constant: rank-deficient Gram matrix (measure too thin for degree k)");
  const detail::MatXld Q = detail::thin_q(qr, nodes.x.size(), cols);

  long double best = 0.0L;
  for (std::size_t i = 0; i < nodes.x.size(); ++i) {
    long double rowsq = 0.0L;
    for (int j = 0; j < cols; ++j) rowsq += Q(static_cast<long>(i), j) * Q(static_cast<long>(i), j);
    best = std::max(best, rowsq / static_cast<long double>(nodes.nu[i]));
  }
  return static_cast<double>(std::sqrt(best));
}

inline BMReport bm_study(const Grid& grid, const std::vector<double>& nu, const WeightSpec& w,
                         const std::vector<int>& degrees) {
  BMReport rep;
  for (int k : degrees) {
    const double m = bm_constant(grid, nu, w, k);
    rep.degrees.push_back(k);
    rep.M_k.push_back(m);
    rep.M_k_kth_root.push_back(k > 0 ? std::pow(m, 1.0 / k) : m);
  }
  return rep;
}

// Extremal sup/L2 ratio over polynomials of EXACT degree k, normalized by the
// leading coefficient: over monic p = m_k + s with s of lower degree, the
// maximum at a node x is sqrt( (m_k(x) e^{-kQ}/||m_k||)^2 + K_{<k}(x) ) where
// m_k is the monic orthogonal polynomial (the residual of projecting x^k onto
// lower degrees) and K_{<k} the lower-degree Christoffel sum.  With an
// infinite-mass base measure toward the pole the exact-degree column carries
// enormous norm and the ratio collapses to ~0.
inline double bm_exact_degree_ratio(const Grid& grid, const std::vector<double>& nu,
                                    const WeightSpec& w, int k) {
  require(k >= 1, errc::config, "bm_exact_degree_ratio: degree must be >= 1");
  require(k <= 64, errc::unsupported, "bm_exact_degree_ratio: k > 64 refused");
  const detail::BmNodes nodes = detail::bm_collect_nodes(grid, nu, w, k);
  require(nodes.x.size() >= static_cast<std::size_t>(k + 1), errc::degenerate_measure,
          "bm_exact_degree_ratio: fewer than k+1 charged nodes");

  detail::MatXld B = detail::bm_vandermonde(nodes, k + 1);
  const long n = static_cast<long>(nodes.x.size());
  detail::MatXld L = B.leftCols(k);
  detail::equilibrate_columns(L);
  Eigen::ColPivHouseholderQR<detail::MatXld> qr(L);
  qr.setThreshold(static_cast<long double>(1e-13));
  require(qr.rank() >= k, errc::degenerate_measure, "bm_exact_degree_ratio: degenerate measure");
  const detail::MatXld Ql = detail::thin_q(qr, nodes.x.size(), k);

  // Residual of the exact-degree column against the lower-degree span.
  Eigen::Matrix<long double, Eigen::Dynamic, 1> bk = B.col(k);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> rho = bk - Ql * (Ql.transpose() * bk);
  const long double rnorm = rho.norm();
  require(rnorm > 0.0L, errc::degenerate_measure, "bm_exact_degree_ratio: zero monic residual");

  long double best = 0.0L;
  for (long i = 0; i < n; ++i) {
    long double lower = 0.0L;
    for (int j = 0; j < k; ++j) lower += Ql(i, j) * Ql(i, j);
    const long double lead = rho(i) / rnorm;
    const long double val = (lead * lead + lower) / static_cast<long double>(nodes.nu[i]);
    best = std::max(best, val);
  }
  return static_cast<double>(std::sqrt(best));
}

// ---------------------------------------------------------------------------
// Bernstein-Walsh diagnostic

struct BwReport {
  int degree = 0;
  int trials = 0;
  double max_log_violation = -kInf;             // over off-support grid nodes
  double max_log_violation_on_support = -kInf;  // diagnostic only
};

// For random polynomials with roots drawn from the equilibrium support,
// verify  log|p(z)| <= log M + k (F_w - U^mu(z))  at off-support nodes,
// where M = sup over support nodes of |p| e^{-kQ}.
inline BwReport bernstein_walsh_check(const EquilibriumResult& eq, const WeightSpec& w,
                                      const Grid& grid, int degree = 10, int trials = 100,
                                      std::uint64_t seed = 11) {
  require(degree >= 0, errc::config, "bernstein_walsh_check: degree must be nonnegative");
  require(trials >= 1, errc::config, "bernstein_walsh_check: trials must be positive");
  const DiscreteMeasure& mu = eq.measure;
  require(mu.size() == grid.size(), errc::contract, "bernstein_walsh_check: measure/grid mismatch");

  const std::vector<double> U = grid_potential_at_nodes(mu);
  const std::size_t n = mu.size();
  std::vector<double> qv(n);
  for (std::size_t i = 0; i < n; ++i)
    qv[i] = mu.chart == Chart::sphere ? sphere_weight_value(w, mu.points[i])
                                      : eval_weight(w, mu.points[i]);

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < n; ++i)
    if (eq.support_mask[i]) support.push_back(i);
  require(!support.empty(), errc::contract, "bernstein_walsh_check: empty support mask");

  BwReport rep;
  rep.degree = degree;
  rep.trials = trials;
  const double kd = static_cast<double>(degree);

  std::vector<double> logp(n);
  for (int t = 0; t < trials; ++t) {
    rng_stream rng(seed, static_cast<std::uint64_t>(t));
    std::vector<PlanePoint> roots;
    roots.reserve(degree);
    for (int r = 0; r < degree; ++r)
      roots.push_back(mu.points[support[rng.below(support.size())]]);

    for (std::size_t i = 0; i < n; ++i) {
      accumulator acc;
      bool zero = false;
      for (const auto& root : roots) {
        const double d = chart_distance(mu.chart, mu.points[i], root);
        if (d == 0.0) {
          zero = true;
          break;
        }
        acc.add(std::log(d));
      }
      logp[i] = zero ? -kInf : acc.value();
    }

    double logM = -kInf;
    for (std::size_t i : support)
      if (qv[i] < kInf) logM = std::max(logM, logp[i] - kd * qv[i]);

    for (std::size_t i = 0; i < n; ++i) {
      if (logp[i] == -kInf) continue;
      const double bound = logM + kd * (eq.F_w - U[i]);
      const double viol = logp[i] - bound;
      if (eq.support_mask[i])
        rep.max_log_violation_on_support = std::max(rep.max_log_violation_on_support, viol);
      else
        rep.max_log_violation = std::max(rep.max_log_violation, viol);
    }
  }
  if (rep.max_log_violation == -kInf) rep.max_log_violation = 0.0;  // vacuous off-support set
  if (rep.max_log_violation_on_support == -kInf) rep.max_log_violation_on_support = 0.0;
  return rep;
}

}  // namespace coulomb
