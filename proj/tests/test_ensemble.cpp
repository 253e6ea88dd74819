#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "coulomb/ensemble.hpp"

using namespace coulomb;

namespace {

EnsembleConfig gaussian_cfg(std::size_t k) {
  EnsembleConfig cfg;
  cfg.domain = Domain::real_line();
  cfg.weight = WeightSpec::gaussian(1.0);
  cfg.k = k;
  cfg.beta = 1.0;
  cfg.convention = ExponentConvention::k;
  return cfg;
}

}  // namespace

TEST_CASE("joint density vanishes off the domain and at collisions") {
  EnsembleConfig cfg;
  cfg.domain = Domain::interval(-1.0, 1.0);
  cfg.k = 2;
  REQUIRE(log_ensemble_density(cfg, {{0.0, 0.0}, {2.0, 0.0}}) == -kInf);
  REQUIRE(log_ensemble_density(cfg, {{0.25, 0.0}, {0.25, 0.0}}) == -kInf);
  const double v = log_ensemble_density(cfg, {{-0.5, 0.0}, {0.5, 0.0}});
  REQUIRE(std::abs(v - 2.0 * std::log(1.0)) < 1e-15);
  cfg.beta = 2.0;
  REQUIRE(std::abs(log_ensemble_density(cfg, {{-0.5, 0.0}, {0.25, 0.0}}) -
                   4.0 * std::log(0.75)) < 1e-15);
}

TEST_CASE("the two exponent conventions differ by exactly the one-body term") {
  EnsembleConfig a = gaussian_cfg(5);
  EnsembleConfig b = a;
  b.convention = ExponentConvention::k_minus_1;
  const std::vector<PlanePoint> pts = {
      {-1.2, 0.0}, {-0.3, 0.0}, {0.1, 0.0}, {0.8, 0.0}, {1.9, 0.0}};
  double sum_q = 0.0;
  for (const auto& p : pts) sum_q += eval_weight(a.weight, p);
  const double da = log_ensemble_density(a, pts);
  const double db = log_ensemble_density(b, pts);
  REQUIRE(std::abs((db - da) - 2.0 * sum_q) < 1e-12);
}

TEST_CASE("single-particle gaussian chain matches its stationary moments") {
  EnsembleConfig cfg = gaussian_cfg(1);
  cfg.mcmc.sweeps = 60000;
  cfg.mcmc.burn_in = 5000;
  cfg.mcmc.thinning = 2;
  cfg.mcmc.chains = 4;
  cfg.mcmc.step = 0.8;
  cfg.mcmc.seed = 31;
  const EnsembleRun run = sample_ensemble(cfg);
  REQUIRE(run.converged);
  // stationary law is Normal(0, 1/4)
  double m1 = 0.0, m2 = 0.0;
  for (const auto& s : run.samples) {
    m1 += s[0].re;
    m2 += s[0].re * s[0].re;
  }
  const double n = static_cast<double>(run.samples.size());
  m1 /= n;
  m2 /= n;
  const double se2 = std::sqrt(2.0) * 0.25 / std::sqrt(n);  // iid-scale error bars
  REQUIRE(std::abs(m1) < 0.02);
  REQUIRE(std::abs(m2 - 0.25) < 12.0 * se2);
}

TEST_CASE("sampler output is identical across thread caps and carries diagnostics") {
  EnsembleConfig cfg = gaussian_cfg(8);
  cfg.mcmc.sweeps = 1500;
  cfg.mcmc.burn_in = 500;
  cfg.mcmc.chains = 4;
  cfg.mcmc.seed = 917;
  setenv("COULOMB_LAB_THREADS", "1", 1);
  const EnsembleRun a = sample_ensemble(cfg);
  setenv("COULOMB_LAB_THREADS", "4", 1);
  const EnsembleRun b = sample_ensemble(cfg);
  unsetenv("COULOMB_LAB_THREADS");
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    for (std::size_t j = 0; j < a.samples[i].size(); ++j) {
      REQUIRE(a.samples[i][j].re == b.samples[i][j].re);
      REQUIRE(a.samples[i][j].im == b.samples[i][j].im);
    }
  REQUIRE(a.acceptance_rate == b.acceptance_rate);
  REQUIRE(a.r_hat == b.r_hat);
  REQUIRE(a.chains == 4);
  REQUIRE(a.per_chain == a.samples.size() / 4);
  REQUIRE(a.acceptance_rate > 0.0);
  REQUIRE(a.acceptance_rate < 1.0);
}

TEST_CASE("an absurdly short run is flagged as unconverged") {
  EnsembleConfig cfg = gaussian_cfg(6);
  cfg.mcmc.sweeps = 12;
  cfg.mcmc.burn_in = 2;
  cfg.mcmc.thinning = 1;
  cfg.mcmc.chains = 4;
  cfg.mcmc.step = 40.0;  // nearly everything rejected, chains stay split
  const EnsembleRun run = sample_ensemble(cfg);
  REQUIRE((!run.converged || run.r_hat > 1.0));
  REQUIRE(!run.note.empty());
}

TEST_CASE("two-particle partition function on the interval is exact") {
  EnsembleConfig cfg;
  cfg.domain = Domain::interval(-1.0, 1.0);
  cfg.weight = WeightSpec::zero();
  cfg.k = 2;
  cfg.beta = 1.0;
  const double logz = zk_quadrature(cfg, 96);
  REQUIRE(std::abs(std::exp(logz) - 8.0 / 3.0) < 1e-10);
}

TEST_CASE("gaussian closed form agrees with tensor quadrature") {
  EnsembleConfig cfg = gaussian_cfg(2);
  const double closed = zk_mehta(cfg);
  const double quad = zk_quadrature(cfg, 80);
  REQUIRE(std::abs(closed - quad) < 1e-8);
  // also at beta = 2 and the other convention
  cfg.beta = 2.0;
  cfg.convention = ExponentConvention::k_minus_1;
  REQUIRE(std::abs(zk_mehta(cfg) - zk_quadrature(cfg, 96)) < 1e-8);
}

TEST_CASE("thermodynamic integration reproduces the closed form") {
  EnsembleConfig cfg = gaussian_cfg(5);
  cfg.mcmc.sweeps = 4000;
  cfg.mcmc.burn_in = 1500;
  cfg.mcmc.thinning = 4;
  cfg.mcmc.chains = 4;
  cfg.mcmc.step = 0.6;
  cfg.mcmc.seed = 2024;
  const TiEstimate ti = zk_thermodynamic(cfg);
  const double exact = zk_mehta(cfg);
  REQUIRE(ti.standard_error > 0.0);
  REQUIRE(std::abs(ti.log_zk - exact) < 6.0 * ti.standard_error + 0.05);
}

TEST_CASE("outlier report declines degenerate thresholds and bounds the interval case") {
  EnsembleConfig cfg;
  cfg.domain = Domain::interval(-1.0, 1.0);
  cfg.weight = WeightSpec::zero();
  cfg.k = 4;
  cfg.mcmc.sweeps = 800;
  cfg.mcmc.burn_in = 300;
  cfg.mcmc.chains = 2;
  const EnsembleRun run = sample_ensemble(cfg);
  const double v_w = std::log(2.0);  // delta = 1/2
  const OutlierReport bad1 = outlier_probability(cfg, run, v_w, 0.0);
  REQUIRE(bad1.declined);
  const OutlierReport bad2 = outlier_probability(cfg, run, v_w, 0.9);
  REQUIRE(bad2.declined);
  const OutlierReport ok = outlier_probability(cfg, run, v_w, 0.05);
  REQUIRE(!ok.declined);
  REQUIRE(ok.empirical >= 0.0);
  REQUIRE(ok.empirical <= 1.0);
  const double expect =
      std::pow(1.0 - 0.05 / (2.0 * 0.5), 12.0) * std::pow(2.0, 4.0);
  REQUIRE(std::abs(ok.bound - expect) < 1e-12);
}
