#pragma once

// Finite-k Coulomb ensembles: joint density evaluation, Metropolis-within-Gibbs
// sampling with convergence diagnostics, partition-function references
// (tensor quadrature, Gamma-product closed form, thermodynamic integration),
// and the Vandermonde outlier bound.
//
// Densities are always evaluated plane-side against the Lebesgue reference:
//   log f(z_1..z_k) = pair_scale * 2 beta sum_{i<j} log|z_i - z_j| - 2c sum_i Q(z_i)
// with c = k or k-1 by convention.  Configurations outside the domain or with
// coincident points get -inf; no other error paths exist here.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "coulomb/common.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/fekete.hpp"
#include "coulomb/geometry.hpp"
#include "coulomb/measures.hpp"
#include "coulomb/quadrature.hpp"
#include "coulomb/rng.hpp"
#include "coulomb/weights.hpp"

namespace coulomb {

enum class ExponentConvention { k, k_minus_1 };

struct McmcParams {
  double step = 0.3;
  std::size_t sweeps = 6000;
  std::size_t burn_in = 2000;
  std::size_t thinning = 4;
  std::size_t chains = 4;
  std::uint64_t seed = 1;
};

struct EnsembleConfig {
  Domain domain = Domain::interval(-1.0, 1.0);
  WeightSpec weight = WeightSpec::zero();
  std::size_t k = 1;
  double beta = 1.0;
  ExponentConvention convention = ExponentConvention::k;
  McmcParams mcmc;
  double pair_scale = 1.0;  // interpolation knob for thermodynamic integration
};

inline double exponent_coefficient(const EnsembleConfig& cfg) {
  return cfg.convention == ExponentConvention::k ? static_cast<double>(cfg.k)
                                                 : static_cast<double>(cfg.k) - 1.0;
}

inline double log_ensemble_density(const EnsembleConfig& cfg, const std::vector<PlanePoint>& pts) {
  require(pts.size() == cfg.k, errc::contract, "log_ensemble_density: wrong configuration size");
  for (const auto& p : pts)
    if (p.at_infinity || !cfg.domain.contains(p)) return -kInf;
  const double c = exponent_coefficient(cfg);
  accumulator acc;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = chart_distance(Chart::plane, pts[i], pts[j]);
      if (d == 0.0) return -kInf;
      acc.add(cfg.pair_scale * 2.0 * cfg.beta * std::log(d));
    }
    const double q = eval_weight(cfg.weight, pts[i]);
    if (q == kInf) return -kInf;
    acc.add(-2.0 * c * q);
  }
  return acc.value();
}

struct EnsembleRun {
  std::vector<std::vector<PlanePoint>> samples;  // chain-major order
  std::vector<double> log_density_values;
  std::size_t chains = 0;
  std::size_t per_chain = 0;
  double acceptance_rate = 0.0;
  double r_hat = kNaN;
  bool converged = false;
  std::uint64_t seed = 0;
  std::string note;
};

namespace detail {

inline bool domain_is_planar(const Domain& d) {
  return d.kind == DomainKind::disk || d.kind == DomainKind::plane;
}

struct ChainResult {
  std::vector<std::vector<PlanePoint>> samples;
  std::vector<double> logdens;
  std::size_t accepted = 0;
  std::size_t proposed = 0;
};

inline PlanePoint chain_init_point(const Domain& dom, rng_stream& rng, double spread) {
  switch (dom.kind) {
    case DomainKind::interval:
      return {dom.a + (dom.b - dom.a) * rng.uniform(), 0.0};
    case DomainKind::half_line: {
      return {std::abs(spread * rng.normal()) + 1e-3, 0.0};
    }
    case DomainKind::real_line:
      return {spread * rng.normal(), 0.0};
    case DomainKind::disk: {
      const double ang = 2.0 * kPi * rng.uniform();
      const double rad = dom.r * std::sqrt(rng.uniform());
      return {dom.a + rad * std::cos(ang), dom.b + rad * std::sin(ang)};
    }
    case DomainKind::plane:
      return {spread * rng.normal(), spread * rng.normal()};
    default:
      fail(errc::unsupported, "sampling is plane-side only");
  }
}

inline ChainResult run_chain(const EnsembleConfig& cfg, std::uint64_t chain_id) {
  const McmcParams& mc = cfg.mcmc;
  rng_stream rng(mc.seed, chain_id);
  const bool planar = domain_is_planar(cfg.domain);
  const double c = exponent_coefficient(cfg);
  const double spread = 1.0 + 0.25 * static_cast<double>(chain_id);

  std::vector<PlanePoint> state(cfg.k);
  for (auto& p : state) p = chain_init_point(cfg.domain, rng, spread);
  // Nudge coincident initial points apart; exact collisions have density -inf.
  for (std::size_t i = 0; i < state.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (state[i] == state[j]) state[i].re += 1e-9 * (1.0 + static_cast<double>(i));

  ChainResult out;
  const std::size_t retained = mc.sweeps > mc.burn_in ? (mc.sweeps - mc.burn_in) / mc.thinning : 0;
  out.samples.reserve(retained);
  out.logdens.reserve(retained);

  std::vector<double> qcache(cfg.k);
  for (std::size_t i = 0; i < cfg.k; ++i) qcache[i] = eval_weight(cfg.weight, state[i]);

  for (std::size_t sweep = 1; sweep <= mc.sweeps; ++sweep) {
    for (std::size_t i = 0; i < cfg.k; ++i) {
      const bool heavy = rng.uniform() < 0.1;  // occasional heavy-tailed move
      PlanePoint prop = state[i];
      if (heavy) {
        prop.re += mc.step * rng.cauchy();
        if (planar) prop.im += mc.step * rng.cauchy();
      } else {
        prop.re += mc.step * rng.normal();
        if (planar) prop.im += mc.step * rng.normal();
      }
      const double u = rng.uniform();  // uniform consumed on every proposal
      ++out.proposed;
      if (prop.at_infinity || !cfg.domain.contains(prop)) continue;
      const double qn = eval_weight(cfg.weight, prop);
      if (qn == kInf) continue;
      double delta = -2.0 * c * (qn - qcache[i]);
      bool collide = false;
      for (std::size_t j = 0; j < cfg.k; ++j) {
        if (j == i) continue;
        const double dn = chart_distance(Chart::plane, prop, state[j]);
        if (dn == 0.0) {
          collide = true;
          break;
        }
        const double d_old = chart_distance(Chart::plane, state[i], state[j]);
        delta += cfg.pair_scale * 2.0 * cfg.beta * (std::log(dn) - std::log(d_old));
      }
      if (collide) continue;
      if (std::log(u) < delta) {
        state[i] = prop;
        qcache[i] = qn;
        ++out.accepted;
      }
    }
    if (sweep > mc.burn_in && (sweep - mc.burn_in) % mc.thinning == 0 &&
        out.samples.size() < retained) {
      out.samples.push_back(state);
      out.logdens.push_back(log_ensemble_density(cfg, state));
    }
  }
  return out;
}

// Split-halves potential scale reduction on a per-chain scalar series.
inline double split_r_hat(const std::vector<std::vector<double>>& series) {
  std::vector<std::vector<double>> halves;
  for (const auto& s : series) {
    const std::size_t n = s.size() / 2;
    if (n < 2) continue;
    halves.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
    halves.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(n),
                        s.begin() + static_cast<std::ptrdiff_t>(2 * n));
  }
  if (halves.size() < 2) return kNaN;
  const double n = static_cast<double>(halves.front().size());
  std::vector<double> means;
  std::vector<double> vars;
  for (const auto& h : halves) {
    accumulator m;
    for (double v : h) m.add(v);
    const double mean = m.value() / n;
    accumulator v2;
    for (double v : h) v2.add((v - mean) * (v - mean));
    means.push_back(mean);
    vars.push_back(v2.value() / (n - 1.0));
  }
  const double m = static_cast<double>(halves.size());
  accumulator gm;
  for (double v : means) gm.add(v);
  const double grand = gm.value() / m;
  accumulator bacc;
  for (double v : means) bacc.add((v - grand) * (v - grand));
  const double B = m > 1.0 ? n * bacc.value() / (m - 1.0) : 0.0;
  accumulator wacc;
  for (double v : vars) wacc.add(v);
  const double W = wacc.value() / m;
  if (!(W > 0.0)) return B > 0.0 ? kInf : 1.0;
  const double var_plus = (n - 1.0) / n * W + B / n;
  return std::sqrt(var_plus / W);
}

}  // namespace detail

inline EnsembleRun sample_ensemble(const EnsembleConfig& cfg) {
  require(cfg.k >= 1, errc::config, "sample_ensemble: k must be positive");
  require(cfg.beta > 0.0, errc::config, "sample_ensemble: beta must be positive");
  require(cfg.mcmc.thinning >= 1, errc::config, "sample_ensemble: thinning must be >= 1");
  require(cfg.mcmc.chains >= 1, errc::config, "sample_ensemble: need at least one chain");
  require(cfg.mcmc.sweeps > cfg.mcmc.burn_in, errc::config,
          "sample_ensemble: sweeps must exceed burn_in");
  // Particles are plane coordinates for every domain kind; only cap domains
  // lack a plane-side parametrization of their own.
  require(cfg.domain.kind != DomainKind::sphere_cap, errc::unsupported,
          "sample_ensemble: cap domains are sphere-side only");

  const std::size_t chains = cfg.mcmc.chains;
  std::vector<detail::ChainResult> results(chains);
  unsigned tc = thread_cap();
  if (tc == 0) tc = std::max(1u, std::thread::hardware_concurrency());
  tc = std::min<unsigned>(tc, static_cast<unsigned>(chains));
  if (tc <= 1) {
    for (std::size_t ch = 0; ch < chains; ++ch) results[ch] = detail::run_chain(cfg, ch);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < tc; ++t)
      pool.emplace_back([&, t]() {
        for (std::size_t ch = t; ch < chains; ch += tc) results[ch] = detail::run_chain(cfg, ch);
      });
    for (auto& th : pool) th.join();
  }

  EnsembleRun run;
  run.chains = chains;
  run.seed = cfg.mcmc.seed;
  run.per_chain = results.front().samples.size();
  std::size_t accepted = 0, proposed = 0;
  std::vector<std::vector<double>> stat_series(chains);
  for (std::size_t ch = 0; ch < chains; ++ch) {
    accepted += results[ch].accepted;
    proposed += results[ch].proposed;
    for (std::size_t s = 0; s < results[ch].samples.size(); ++s) {
      const auto& pts = results[ch].samples[s];
      accumulator r2;
      for (const auto& p : pts) r2.add(p.abs2());
      stat_series[ch].push_back(r2.value() / static_cast<double>(cfg.k));
      run.samples.push_back(pts);
      run.log_density_values.push_back(results[ch].logdens[s]);
    }
  }
  run.acceptance_rate = proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed)
                                     : 0.0;
  run.r_hat = detail::split_r_hat(stat_series);
  const bool degenerate = !(run.acceptance_rate > 0.0 && run.acceptance_rate < 1.0);
  if (degenerate) run.note = "degenerate acceptance rate";
  const bool mixed = run.r_hat == run.r_hat && run.r_hat <= 1.1;
  if (!mixed && run.note.empty()) run.note = "split R-hat above 1.1";
  run.converged = mixed && !degenerate;
  return run;
}

// ---------------------------------------------------------------------------
// Partition function references

enum class ZkMode { quadrature, mehta };

namespace detail {

// Tensor-product quadrature over k axes with a shared 1D rule.
inline long double zk_tensor(const QuadratureRule& rule, std::size_t k, double beta,
                             const std::vector<double>& qexp) {
  const std::size_t n = rule.nodes.size();
  std::vector<std::size_t> idx(k, 0);
  long double total = 0.0L;
  while (true) {
    long double term = 0.0L;
    bool dead = false;
    for (std::size_t i = 0; i < k; ++i) {
      term += static_cast<long double>(std::log(rule.weights[idx[i]])) +
              static_cast<long double>(qexp[idx[i]]);
      for (std::size_t j = i + 1; j < k; ++j) {
        const double d = std::abs(rule.nodes[idx[i]] - rule.nodes[idx[j]]);
        if (d == 0.0) {
          dead = true;
          break;
        }
        term += static_cast<long double>(2.0 * beta * std::log(d));
      }
      if (dead) break;
    }
    if (!dead) total += std::exp(term);
    std::size_t axis = 0;
    while (axis < k && ++idx[axis] == n) idx[axis++] = 0;
    if (axis == k) break;
  }
  return total;
}

}  // namespace detail

// log Z_k by direct tensor quadrature; exact reference for k <= 4.
inline double zk_quadrature(const EnsembleConfig& cfg, std::size_t nodes_per_axis = 64) {
  require(cfg.k >= 1 && cfg.k <= 4, errc::unsupported,
          "zk_quadrature: tensor reference limited to k <= 4");
  require(nodes_per_axis >= 64, errc::config, "zk_quadrature: need at least 64 nodes per axis");
  const double c = exponent_coefficient(cfg);
  if (cfg.domain.kind == DomainKind::interval) {
    QuadratureRule rule = on_interval(gauss_legendre(nodes_per_axis), cfg.domain.a, cfg.domain.b);
    std::vector<double> qexp(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      qexp[i] = -2.0 * c * eval_weight(cfg.weight, {rule.nodes[i], 0.0});
    return static_cast<double>(std::log(detail::zk_tensor(rule, cfg.k, cfg.beta, qexp)));
  }
  if (cfg.domain.kind == DomainKind::real_line && cfg.weight.kind == WeightKind::gaussian) {
    // Substitute x = s y with s = 1/sqrt(2ct) so the Gaussian factor becomes e^{-y^2}.
    const double s = 1.0 / std::sqrt(2.0 * c * cfg.weight.t);
    QuadratureRule rule = gauss_hermite(nodes_per_axis);
    std::vector<double> qexp(rule.nodes.size(), 0.0);
    const double kk = static_cast<double>(cfg.k);
    const double logsum =
        static_cast<double>(std::log(detail::zk_tensor(rule, cfg.k, cfg.beta, qexp)));
    return (cfg.beta * kk * (kk - 1.0) + kk) * std::log(s) + logsum;
  }
  fail(errc::unsupported, "zk_quadrature: supported on intervals or the Gaussian real line");
}

// Closed-form log Z_k for the Gaussian weight on the real line, any beta:
// substituting x = s u with s = 1/sqrt(4ct) reduces Z_k to Mehta's integral
//   int prod |u_i-u_j|^{2 beta} e^{-sum u^2/2} du
//     = (2 pi)^{k/2} prod_{j=1}^{k} Gamma(1+j beta)/Gamma(1+beta).
inline double zk_mehta(const EnsembleConfig& cfg) {
  require(cfg.domain.kind == DomainKind::real_line, errc::unsupported,
          "zk_mehta: real-line Gaussian only");
  require(cfg.weight.kind == WeightKind::gaussian, errc::unsupported,
          "zk_mehta: real-line Gaussian only");
  const double c = exponent_coefficient(cfg);
  const double s = 1.0 / std::sqrt(4.0 * c * cfg.weight.t);
  const double kk = static_cast<double>(cfg.k);
  double logz = (cfg.beta * kk * (kk - 1.0) + kk) * std::log(s) + 0.5 * kk * std::log(2.0 * kPi);
  for (std::size_t j = 1; j <= cfg.k; ++j)
    logz += std::lgamma(1.0 + static_cast<double>(j) * cfg.beta) - std::lgamma(1.0 + cfg.beta);
  return logz;
}

inline double zk_reference(const EnsembleConfig& cfg, ZkMode mode) {
  return mode == ZkMode::quadrature ? zk_quadrature(cfg) : zk_mehta(cfg);
}

namespace detail {

// log of the one-body normalizer int_domain e^{-2cQ} dx (Lebesgue reference).
inline double log_one_body_integral(const EnsembleConfig& cfg) {
  const double c = exponent_coefficient(cfg);
  accumulator acc;
  if (cfg.domain.kind == DomainKind::interval) {
    QuadratureRule rule = on_interval(gauss_legendre(512), cfg.domain.a, cfg.domain.b);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc.add(rule.weights[i] * std::exp(-2.0 * c * eval_weight(cfg.weight, {rule.nodes[i], 0.0})));
    return std::log(acc.value());
  }
  if (cfg.domain.kind == DomainKind::real_line) {
    if (cfg.weight.kind == WeightKind::gaussian)
      return 0.5 * std::log(kPi / (2.0 * c * cfg.weight.t));
    // Generic decaying weight: fold the line onto (-pi/2, pi/2) via x = tan(theta).
    QuadratureRule rule = on_interval(gauss_legendre(1024), -0.5 * kPi, 0.5 * kPi);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = std::tan(rule.nodes[i]);
      const double jac = 1.0 + x * x;
      const double q = eval_weight(cfg.weight, {x, 0.0});
      if (q == kInf) continue;
      acc.add(rule.weights[i] * jac * std::exp(-2.0 * c * q));
    }
    const double val = acc.value();
    require(val > 0.0 && val < kInf, errc::admissibility,
            "log_one_body_integral: one-body integral diverges");
    return std::log(val);
  }
  if (cfg.domain.kind == DomainKind::half_line) {
    // x = u/(1-u) maps (0,1) onto the half line.
    QuadratureRule rule = on_interval(gauss_legendre(1024), 0.0, 1.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = rule.nodes[i];
      const double x = u / (1.0 - u);
      const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
      const double q = eval_weight(cfg.weight, {x, 0.0});
      if (q == kInf) continue;
      acc.add(rule.weights[i] * jac * std::exp(-2.0 * c * q));
    }
    const double val = acc.value();
    require(val > 0.0 && val < kInf, errc::admissibility,
            "log_one_body_integral: one-body integral diverges");
    return std::log(val);
  }
  fail(errc::unsupported, "log_one_body_integral: 1D domains only");
}

}  // namespace detail

struct TiEstimate {
  double log_zk = 0.0;
  double standard_error = 0.0;
  std::vector<double> ticks;
  std::vector<double> pair_means;
};

// Thermodynamic integration along the pair-interaction strength:
//   d/dl log Z(l) = E_l[ 2 beta sum_{i<j} log|z_i - z_j| ],  Z(0) = (int e^{-2cQ})^k.
inline TiEstimate zk_thermodynamic(const EnsembleConfig& base) {
  require(base.k >= 2, errc::config, "zk_thermodynamic: needs k >= 2");
  QuadratureRule ticks = on_interval(gauss_legendre(21), 0.0, 1.0);
  TiEstimate est;
  accumulator total;
  double var_sum = 0.0;
  for (std::size_t t = 0; t < ticks.nodes.size(); ++t) {
    EnsembleConfig cfg = base;
    cfg.pair_scale = ticks.nodes[t];
    cfg.mcmc.seed = base.mcmc.seed + 777u * (t + 1);
    EnsembleRun run = sample_ensemble(cfg);
    // Per-chain means of the pair sum give the tick mean and its spread.
    std::vector<double> chain_means;
    for (std::size_t ch = 0; ch < run.chains; ++ch) {
      accumulator cm;
      for (std::size_t s = 0; s < run.per_chain; ++s) {
        const auto& pts = run.samples[ch * run.per_chain + s];
        accumulator pair;
        for (std::size_t i = 0; i < pts.size(); ++i)
          for (std::size_t j = i + 1; j < pts.size(); ++j)
            pair.add(2.0 * base.beta *
                     std::log(chart_distance(Chart::plane, pts[i], pts[j])));
        cm.add(pair.value());
      }
      chain_means.push_back(cm.value() / static_cast<double>(run.per_chain));
    }
    accumulator macc;
    for (double v : chain_means) macc.add(v);
    const double mean = macc.value() / static_cast<double>(chain_means.size());
    double se = 0.0;
    if (chain_means.size() > 1) {
      accumulator vacc;
      for (double v : chain_means) vacc.add((v - mean) * (v - mean));
      se = std::sqrt(vacc.value() / (static_cast<double>(chain_means.size()) - 1.0) /
                     static_cast<double>(chain_means.size()));
    }
    est.ticks.push_back(ticks.nodes[t]);
    est.pair_means.push_back(mean);
    total.add(ticks.weights[t] * mean);
    var_sum += ticks.weights[t] * ticks.weights[t] * se * se;
  }
  est.log_zk = static_cast<double>(base.k) * detail::log_one_body_integral(base) + total.value();
  est.standard_error = std::sqrt(var_sum);
  return est;
}

struct ZkRow {
  std::size_t k = 0;
  double log_zk = 0.0;
  double standard_error = 0.0;
  double normalized = 0.0;  // log Z_k / (k(k-1))
  double gap = 0.0;         // |normalized - target|
  std::string method;
};

struct ZkTable {
  std::vector<ZkRow> rows;
  double target = 0.0;  // normalized large-k limit from the equilibrium run
};

// Growth study of log Z_k against the equilibrium prediction.  Small k uses
// the exact references; intermediate k falls back to thermodynamic
// integration.  The normalized target is -(weighted energy at equilibrium).
inline ZkTable zk_asymptotics(const EnsembleConfig& base, const std::vector<std::size_t>& k_list,
                              double normalized_target) {
  ZkTable table;
  table.target = normalized_target;
  for (std::size_t k : k_list) {
    EnsembleConfig cfg = base;
    cfg.k = k;
    ZkRow row;
    row.k = k;
    if (cfg.domain.kind == DomainKind::real_line && cfg.weight.kind == WeightKind::gaussian) {
      row.log_zk = zk_mehta(cfg);
      row.method = "mehta";
    } else if (k <= 4) {
      row.log_zk = zk_quadrature(cfg);
      row.method = "quadrature";
    } else {
      require(k <= 32, errc::unsupported, "zk_asymptotics: k > 32 needs a closed form");
      TiEstimate est = zk_thermodynamic(cfg);
      row.log_zk = est.log_zk;
      row.standard_error = est.standard_error;
      row.method = "thermodynamic";
    }
    const double kk = static_cast<double>(k);
    row.normalized = k >= 2 ? row.log_zk / (kk * (kk - 1.0)) : kNaN;
    row.gap = k >= 2 ? std::abs(row.normalized - normalized_target) : kNaN;
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Outlier probability for the scaled Vandermonde

struct OutlierReport {
  double eta = 0.0;
  double delta = 0.0;       // transfinite-diameter limit exp(-V_w)
  double empirical = 0.0;   // fraction of samples below the threshold
  double standard_error = 0.0;
  double bound = kNaN;      // (1 - eta/(2 delta))^{k(k-1)} nu(K)^k, finite base mass only
  bool declined = false;
  std::string note;
};

// Probability that the sampled configuration's normalized weighted Vandermonde
// falls below log(delta - eta).  Declines (with a note) when eta <= 0: the
// bound degenerates and the event has probability one in the limit.
inline OutlierReport outlier_probability(const EnsembleConfig& cfg, const EnsembleRun& run,
                                         double v_w, double eta) {
  OutlierReport rep;
  rep.eta = eta;
  rep.delta = std::exp(-v_w);
  if (!(eta > 0.0)) {
    rep.declined = true;
    rep.note = "eta must be strictly positive: at eta = 0 the bound is vacuous";
    return rep;
  }
  if (eta >= rep.delta) {
    rep.declined = true;
    rep.note = "eta >= delta: threshold log(delta - eta) undefined";
    return rep;
  }
  require(cfg.k >= 2, errc::config, "outlier_probability: needs k >= 2");
  const double kk = static_cast<double>(cfg.k);
  const double threshold = std::log(rep.delta - eta);
  std::size_t hits = 0;
  for (const auto& pts : run.samples) {
    const double lv = log_vdm_weighted(Chart::plane, pts, cfg.weight);
    const double normalized = 2.0 * lv / (kk * (kk - 1.0));
    if (normalized < threshold) ++hits;
  }
  const double n = static_cast<double>(run.samples.size());
  rep.empirical = n > 0.0 ? static_cast<double>(hits) / n : 0.0;
  rep.standard_error = n > 0.0 ? std::sqrt(std::max(rep.empirical * (1.0 - rep.empirical), 1e-12) / n)
                               : 0.0;
  double base_mass = kNaN;
  if (cfg.domain.kind == DomainKind::interval) base_mass = cfg.domain.b - cfg.domain.a;
  if (cfg.domain.kind == DomainKind::disk) base_mass = kPi * cfg.domain.r * cfg.domain.r;
  if (base_mass == base_mass) {
    rep.bound = std::pow(1.0 - eta / (2.0 * rep.delta), kk * (kk - 1.0)) * std::pow(base_mass, kk);
  } else {
    rep.note = "base mass infinite: a-priori bound unavailable, empirical estimate only";
  }
  return rep;
}

}  // namespace coulomb
