#pragma once

// Experiment orchestration shared by the CLI and tests: a strict config
// schema, per-command runners that write their artifacts, and the run
// manifest (config echo, seeds, wall clock, artifact checksums).
//
// Exit-code contract, stable across versions:
//   0 success, 2 config/schema error, 3 admissibility failure,
//   4 non-convergence (artifacts are still written in full).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "coulomb/bernstein_markov.hpp"
#include "coulomb/common.hpp"
#include "coulomb/ensemble.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/fekete.hpp"
#include "coulomb/geometry.hpp"
#include "coulomb/io.hpp"
#include "coulomb/ldp.hpp"
#include "coulomb/measures.hpp"
#include "coulomb/rng.hpp"
#include "coulomb/weights.hpp"

namespace coulomb {

inline constexpr const char* kArtifactVersion = "0.1.0";

inline int exit_code_for(errc code) {
  switch (code) {
    case errc::admissibility: return 3;
    case errc::non_convergence: return 4;
    default: return 2;
  }
}

namespace detail {

// Reads config keys while recording the effective value of every key it
// touches; unknown keys in the input are schema errors.
class ConfigReader {
 public:
  explicit ConfigReader(json cfg) : in_(std::move(cfg)) {
    require(in_.is_object(), errc::config, "config must be a JSON object");
  }

  double num(const std::string& key, double def) {
    const json v = fetch(key);
    if (v.is_null()) {
      effective_[key] = json_number(def);
      return def;
    }
    require(v.is_number(), errc::config, "config key '" + key + "' must be a number");
    effective_[key] = v;
    return v.get<double>();
  }

  std::size_t integer(const std::string& key, std::size_t def) {
    const json v = fetch(key);
    if (v.is_null()) {
      effective_[key] = def;
      return def;
    }
    require(v.is_number_integer() && v.get<long long>() >= 0, errc::config,
            "config key '" + key + "' must be a nonnegative integer");
    effective_[key] = v;
    return static_cast<std::size_t>(v.get<long long>());
  }

  std::string str(const std::string& key, const std::string& def) {
    const json v = fetch(key);
    if (v.is_null()) {
      effective_[key] = def;
      return def;
    }
    require(v.is_string(), errc::config, "config key '" + key + "' must be a string");
    effective_[key] = v;
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool def) {
    const json v = fetch(key);
    if (v.is_null()) {
      effective_[key] = def;
      return def;
    }
    require(v.is_boolean(), errc::config, "config key '" + key + "' must be a boolean");
    effective_[key] = v;
    return v.get<bool>();
  }

  std::vector<std::size_t> size_list(const std::string& key, std::vector<std::size_t> def) {
    const json v = fetch(key);
    if (v.is_null()) {
      effective_[key] = def;
      return def;
    }
    require(v.is_array() && !v.empty(), errc::config,
            "config key '" + key + "' must be a nonempty array of integers");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      require(e.is_number_integer() && e.get<long long>() > 0, errc::config,
              "config key '" + key + "' must hold positive integers");
      out.push_back(static_cast<std::size_t>(e.get<long long>()));
    }
    effective_[key] = v;
    return out;
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> def) {
    std::vector<std::size_t> d(def.begin(), def.end());
    std::vector<std::size_t> got = size_list(key, d);
    return std::vector<int>(got.begin(), got.end());
  }

  void finish() const {
    for (auto it = in_.begin(); it != in_.end(); ++it)
      require(touched_.count(it.key()) != 0, errc::config,
              "unknown config key: '" + it.key() + "'");
  }

  const json& effective() const { return effective_; }

 private:
  json fetch(const std::string& key) {
    touched_.insert(key);
    auto it = in_.find(key);
    return it == in_.end() ? json() : *it;
  }

  json in_;
  json effective_;
  std::set<std::string> touched_;
};

struct ManifestBuilder {
  json config;
  std::vector<std::uint64_t> seeds;
  json checksums = json::object();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void record(const std::string& name, const std::string& checksum) {
    checksums[name] = checksum;
  }

  void emit(const std::string& outdir, const std::string& command) {
    json m;
    m["artifact_version"] = kArtifactVersion;
    m["command"] = command;
    m["config"] = config;
    json s = json::array();
    for (std::uint64_t v : seeds) s.push_back(v);
    m["seeds"] = s;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m["wall_clock_seconds"] = json_number(wall);
    unsigned tc = thread_cap();
    m["threads"] = tc == 0 ? std::max(1u, std::thread::hardware_concurrency()) : tc;
    m["checksums"] = checksums;
    write_text_file(outdir + "/manifest.json", m.dump(2) + "\n");
  }
};

inline std::string ensure_outdir(const std::string& outdir) {
  require(!outdir.empty(), errc::config, "output directory must not be empty");
  std::filesystem::create_directories(outdir);
  return outdir;
}

inline McmcParams read_mcmc(ConfigReader& cfg) {
  McmcParams mc;
  mc.step = cfg.num("step", mc.step);
  mc.sweeps = cfg.integer("sweeps", mc.sweeps);
  mc.burn_in = cfg.integer("burn_in", mc.burn_in);
  mc.thinning = cfg.integer("thinning", mc.thinning);
  mc.chains = cfg.integer("chains", mc.chains);
  mc.seed = cfg.integer("seed", 1);
  return mc;
}

inline ExponentConvention read_convention(ConfigReader& cfg) {
  const std::string conv = cfg.str("convention", "k");
  if (conv == "k") return ExponentConvention::k;
  if (conv == "k-1") return ExponentConvention::k_minus_1;
  fail(errc::config, "convention must be 'k' or 'k-1'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Command runners.  Each writes its artifacts plus manifest.json and returns
// the process exit code.

inline int run_equilibrium_command(detail::ConfigReader& cfg, const std::string& outdir) {
  detail::ManifestBuilder manifest;
  const Domain dom = parse_domain(cfg.str("domain", "interval:-1,1"));
  const WeightSpec w = parse_weight(cfg.str("weight", "zero"));
  const std::size_t n = cfg.integer("n", 2000);
  EquilibriumOptions opts;
  opts.tol = cfg.num("tol", opts.tol);
  opts.max_iter = cfg.integer("max_iter", opts.max_iter);
  opts.support_threshold = cfg.num("support_threshold", opts.support_threshold);
  opts.via_sphere = cfg.boolean("via_sphere", opts.via_sphere);
  cfg.finish();
  manifest.config = cfg.effective();

  check_weight_domain(w, dom);
  const AdmissibilityReport adm = classify_admissibility(w, dom);
  if (!dom.is_bounded())
    require(adm.cls != AdmissibilityClass::not_admissible, errc::admissibility,
            "weight is not admissible on this unbounded domain");

  const Grid grid = build_grid(dom, n);
  const EquilibriumResult res = solve_equilibrium(grid, w, opts);
  const FrostmanReport fro = frostman_report(res, w, grid, opts.support_threshold);

  manifest.record("measure.csv", write_text_file(outdir + "/measure.csv",
                                                 measure_to_csv(res.measure)));
  {
    std::ostringstream out;
    out << "re,im,at_infinity,mass,residual,on_support\n";
    for (std::size_t i = 0; i < res.measure.size(); ++i) {
      const PlanePoint& p = res.measure.points[i];
      out << format_double(p.at_infinity ? 0.0 : p.re) << ','
          << format_double(p.at_infinity ? 0.0 : p.im) << ',' << (p.at_infinity ? 1 : 0) << ','
          << format_double(res.measure.mass[i]) << ',' << format_double(fro.residual[i]) << ','
          << (fro.support_mask[i] ? 1 : 0) << "\n";
    }
    manifest.record("frostman.csv", write_text_file(outdir + "/frostman.csv", out.str()));
  }
  json summary;
  summary["V_w"] = json_number(res.V_w);
  summary["F_w"] = json_number(res.F_w);
  summary["fw_gap"] = json_number(res.fw_gap);
  summary["iterations"] = res.iterations;
  summary["converged"] = res.converged;
  summary["admissibility"] = to_string(adm.cls);
  summary["growth_constant_estimate"] = json_number(adm.M_estimate);
  summary["frostman_max_violation_on_support"] = json_number(fro.max_violation_on_support);
  summary["frostman_max_violation_off_support"] = json_number(fro.max_violation_off_support);
  summary["measure"] = measure_summary_json(res.measure);
  manifest.record("summary.json", write_text_file(outdir + "/summary.json",
                                                  summary.dump(2) + "\n"));
  manifest.emit(outdir, "equilibrium");
  return res.converged ? 0 : 4;
}

inline int run_fekete_command(detail::ConfigReader& cfg, const std::string& outdir) {
  detail::ManifestBuilder manifest;
  const Domain dom = parse_domain(cfg.str("domain", "interval:-1,1"));
  const WeightSpec w = parse_weight(cfg.str("weight", "zero"));
  const std::size_t n = cfg.integer("n", 400);
  const std::size_t k = cfg.integer("k", 8);
  const std::size_t restarts = cfg.integer("restarts", 2);
  const std::uint64_t seed = cfg.integer("seed", 0x5eed);
  cfg.finish();
  manifest.config = cfg.effective();
  manifest.seeds.push_back(seed);

  check_weight_domain(w, dom);
  const Grid grid =
      dom.kind == DomainKind::interval ? fekete_lattice(dom, n) : build_grid(dom, n);
  const FeketeResult res = compute_fekete(grid, w, k, restarts, seed);

  {
    std::ostringstream out;
    out << "re,im\n";
    for (const auto& p : res.points)
      out << format_double(p.re) << ',' << format_double(p.im) << "\n";
    manifest.record("points.csv", write_text_file(outdir + "/points.csv", out.str()));
  }
  json summary;
  summary["k"] = k;
  summary["log_vdm_q"] = json_number(res.log_vdm_q);
  summary["delta_k"] = json_number(res.delta_k);
  summary["method"] = res.method;
  summary["exchanges"] = res.exchanges;
  manifest.record("fekete.json", write_text_file(outdir + "/fekete.json",
                                                 summary.dump(2) + "\n"));
  manifest.emit(outdir, "fekete");
  return 0;
}

namespace detail {

inline EnsembleConfig read_ensemble(ConfigReader& cfg) {
  EnsembleConfig ec;
  ec.domain = parse_domain(cfg.str("domain", "interval:-1,1"));
  ec.weight = parse_weight(cfg.str("weight", "zero"));
  ec.k = cfg.integer("k", 8);
  ec.beta = cfg.num("beta", 1.0);
  ec.convention = read_convention(cfg);
  ec.mcmc = read_mcmc(cfg);
  check_weight_domain(ec.weight, ec.domain);
  return ec;
}

}  // namespace detail

inline int run_sample_command(detail::ConfigReader& cfg, const std::string& outdir) {
  detail::ManifestBuilder manifest;
  EnsembleConfig ec = detail::read_ensemble(cfg);
  cfg.finish();
  manifest.config = cfg.effective();
  manifest.seeds.push_back(ec.mcmc.seed);

  const EnsembleRun run = sample_ensemble(ec);
  {
    std::ostringstream out;
    out << "chain,sample";
    for (std::size_t i = 0; i < ec.k; ++i) out << ",re_" << i << ",im_" << i;
    out << "\n";
    for (std::size_t s = 0; s < run.samples.size(); ++s) {
      out << (run.per_chain > 0 ? s / run.per_chain : 0) << ','
          << (run.per_chain > 0 ? s % run.per_chain : s);
      for (const auto& p : run.samples[s])
        out << ',' << format_double(p.re) << ',' << format_double(p.im);
      out << "\n";
    }
    manifest.record("samples.csv", write_text_file(outdir + "/samples.csv", out.str()));
  }
  json diag;
  diag["chains"] = run.chains;
  diag["per_chain"] = run.per_chain;
  diag["acceptance_rate"] = json_number(run.acceptance_rate);
  diag["r_hat"] = json_number(run.r_hat);
  diag["converged"] = run.converged;
  diag["seed"] = run.seed;
  diag["note"] = run.note;
  manifest.record("diagnostics.json", write_text_file(outdir + "/diagnostics.json",
                                                      diag.dump(2) + "\n"));
  manifest.emit(outdir, "sample");
  return run.converged ? 0 : 4;
}

inline int run_zk_command(detail::ConfigReader& cfg, const std::string& outdir) {
  detail::ManifestBuilder manifest;
  const std::string mode = cfg.str("mode", "quadrature");
  json summary;
  if (mode == "asymptotics") {
    EnsembleConfig ec = detail::read_ensemble(cfg);
    const std::vector<std::size_t> k_list = cfg.size_list("k_list", {8, 16, 32});
    const std::size_t n = cfg.integer("n", 2000);
    cfg.finish();
    manifest.config = cfg.effective();
    manifest.seeds.push_back(ec.mcmc.seed);
    const Grid grid = build_grid(ec.domain, n);
    const EquilibriumResult eq = solve_equilibrium(grid, ec.weight, EquilibriumOptions{});
    const ZkTable table = zk_asymptotics(ec, k_list, -eq.V_w);
    summary["target"] = json_number(table.target);
    json rows = json::array();
    for (const auto& r : table.rows) {
      json row;
      row["k"] = r.k;
      row["log_zk"] = json_number(r.log_zk);
      row["standard_error"] = json_number(r.standard_error);
      row["normalized"] = json_number(r.normalized);
      row["gap"] = json_number(r.gap);
      row["method"] = r.method;
      rows.push_back(row);
    }
    summary["rows"] = rows;
  } else {
    EnsembleConfig ec = detail::read_ensemble(cfg);
    cfg.finish();
    manifest.config = cfg.effective();
    const double logz = zk_reference(ec, mode == "mehta" ? ZkMode::mehta : ZkMode::quadrature);
    summary["k"] = ec.k;
    summary["log_zk"] = json_number(logz);
    summary["method"] = mode;
  }
  manifest.record("zk.json", write_text_file(outdir + "/zk.json", summary.dump(2) + "\n"));
  manifest.emit(outdir, "zk");
  return 0;
}

inline int run_bm_command(detail::ConfigReader& cfg, const std::string& outdir) {
  detail::ManifestBuilder manifest;
  const Domain dom = parse_domain(cfg.str("domain", "interval:-1,1"));
  const WeightSpec w = parse_weight(cfg.str("weight", "zero"));
  const std::size_t n = cfg.integer("n", 4000);
  const std::vector<int> degrees = cfg.int_list("degrees", {2, 4, 8, 16, 32});
  cfg.finish();
  manifest.config = cfg.effective();

  check_weight_domain(w, dom);
  const Grid grid = build_grid(dom, n);
  const BMReport rep = bm_study(grid, grid.cell_measure, w, degrees);
  json summary;
  summary["degrees"] = rep.degrees;
  json mk = json::array(), root = json::array();
  for (double v : rep.M_k) mk.push_back(json_number(v));
  for (double v : rep.M_k_kth_root) root.push_back(json_number(v));
  summary["M_k"] = mk;
  summary["M_k_kth_root"] = root;
  manifest.record("bm.json", write_text_file(outdir + "/bm.json", summary.dump(2) + "\n"));
  manifest.emit(outdir, "bm");
  return 0;
}

inline int run_ldp_command(detail::ConfigReader& cfg, const std::string& outdir) {
  detail::ManifestBuilder manifest;
  EnsembleConfig ec = detail::read_ensemble(cfg);
  const std::size_t n = cfg.integer("n", 400);
  const double radius = cfg.num("radius", 0.1);
  const std::vector<std::size_t> k_list = cfg.size_list("k_list", {8, 16, 24});
  const std::string center_file = cfg.str("center", "");
  cfg.finish();
  manifest.config = cfg.effective();
  manifest.seeds.push_back(ec.mcmc.seed);

  const Grid grid = build_grid(ec.domain, n);
  const EquilibriumResult eq = solve_equilibrium(grid, ec.weight, EquilibriumOptions{});
  NeighborhoodSpec ball;
  ball.center = center_file.empty() ? eq.measure : measure_from_csv(read_text_file(center_file));
  ball.radius = radius;
  const LDPReport rep = ldp_study(ball, ec, eq, ec.weight, k_list);

  json summary;
  summary["k_list"] = rep.k_list;
  json sh = json::array(), se = json::array(), sl = json::array();
  for (double v : rep.sigma_hat) sh.push_back(json_number(v));
  for (double v : rep.sigma_se) se.push_back(json_number(v));
  for (double v : rep.per_k_slopes) sl.push_back(json_number(v));
  summary["sigma_hat"] = sh;
  summary["sigma_se"] = se;
  summary["per_k_slopes"] = sl;
  summary["rate_at_center"] = json_number(rep.rate_at_center);
  summary["lipschitz_slack"] = json_number(rep.lipschitz_slack);
  summary["rate_lower_bound_over_ball"] = json_number(rep.rate_lower_bound_over_ball);
  json slope;
  slope["slope_k2"] = json_number(rep.slope.slope_k2);
  slope["slope_kk1"] = json_number(rep.slope.slope_kk1);
  slope["slope_se"] = json_number(rep.slope.slope_se);
  slope["reference"] = json_number(rep.slope.reference);
  slope["verdict"] = to_string(rep.slope.verdict);
  slope["note"] = rep.slope.note;
  summary["slope"] = slope;
  manifest.record("ldp.json", write_text_file(outdir + "/ldp.json", summary.dump(2) + "\n"));
  manifest.emit(outdir, "ldp");
  return 0;
}

// Randomized self-check of the stereographic machinery: the chordal-metric
// product identity and projection round-trips, with the infinity marker
// included among the probes.
struct StereoCheck {
  double max_identity_rel_err = 0.0;
  double max_roundtrip_err = 0.0;
  bool pass = false;
};

inline StereoCheck stereo_self_check(std::size_t trials = 10000, std::uint64_t seed = 7) {
  rng_stream rng(seed, 0);
  StereoCheck chk;
  auto random_point = [&](std::size_t t) -> PlanePoint {
    if (t % 97 == 0) return PlanePoint::infinity();
    if (t % 3 == 0) return {std::tan(kPi * (rng.uniform() - 0.5)), rng.normal()};
    return {rng.normal(), rng.normal()};
  };
  for (std::size_t t = 0; t < trials; ++t) {
    const PlanePoint z = random_point(t);
    const PlanePoint u = random_point(t + 1);
    const double chordal = chordal_distance(stereo_project(z), stereo_project(u));
    const double viaplane = chordal_distance(z, u);
    const double scale = std::max(1e-300, std::max(chordal, viaplane));
    chk.max_identity_rel_err =
        std::max(chk.max_identity_rel_err, std::abs(chordal - viaplane) / scale);
    const PlanePoint back = stereo_inverse(stereo_project(z));
    chk.max_roundtrip_err = std::max(chk.max_roundtrip_err, chart_distance(Chart::sphere, z, back));
  }
  chk.pass = chk.max_identity_rel_err <= 1e-12 && chk.max_roundtrip_err <= 1e-9;
  return chk;
}

inline int run_stereo_test_command(detail::ConfigReader& cfg, const std::string& outdir) {
  detail::ManifestBuilder manifest;
  const std::size_t trials = cfg.integer("trials", 10000);
  const std::uint64_t seed = cfg.integer("seed", 7);
  cfg.finish();
  manifest.config = cfg.effective();
  manifest.seeds.push_back(seed);

  const StereoCheck chk = stereo_self_check(trials, seed);
  json summary;
  summary["trials"] = trials;
  summary["max_identity_rel_err"] = json_number(chk.max_identity_rel_err);
  summary["max_roundtrip_err"] = json_number(chk.max_roundtrip_err);
  summary["pass"] = chk.pass;
  manifest.record("stereo.json", write_text_file(outdir + "/stereo.json",
                                                 summary.dump(2) + "\n"));
  manifest.emit(outdir, "stereo-test");
  return chk.pass ? 0 : 4;
}

// Dispatch on cfg["command"].  Throws coulomb::error for config problems; the
// CLI maps those to exit codes via exit_code_for.
inline int run_experiment(const json& config, const std::string& outdir) {
  require(config.is_object() && config.contains("command") && config["command"].is_string(),
          errc::config, "config needs a string 'command'");
  const std::string command = config["command"].get<std::string>();
  json rest = config;
  rest.erase("command");
  detail::ConfigReader reader(rest);
  const std::string dir = detail::ensure_outdir(outdir);
  if (command == "equilibrium") return run_equilibrium_command(reader, dir);
  if (command == "fekete") return run_fekete_command(reader, dir);
  if (command == "sample") return run_sample_command(reader, dir);
  if (command == "zk") return run_zk_command(reader, dir);
  if (command == "bm") return run_bm_command(reader, dir);
  if (command == "ldp") return run_ldp_command(reader, dir);
  if (command == "stereo-test") return run_stereo_test_command(reader, dir);
  fail(errc::config, "unknown command: " + command);
}

}  // namespace coulomb
