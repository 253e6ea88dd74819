// coulomb-lab: weighted potential-theory experiments from the command line.
//
// Subcommands: equilibrium, fekete, sample, zk, bm, ldp, stereo-test.
// Config precedence: JSON file from --config, overridden by explicit flags.
// Exit codes: 0 success, 2 config/schema, 3 admissibility, 4 non-convergence
// (non-convergent runs still write their artifacts).

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coulomb/experiment.hpp"

namespace {

using coulomb::json;

struct PendingOption {
  CLI::Option* opt = nullptr;
  std::string key;
  enum class Kind { text, integer, floating, int_list, flag } kind = Kind::text;
  std::string text;
  long long integer = 0;
  double floating = 0.0;
  std::vector<long long> int_list;
  bool flag = false;
};

// Collects subcommand flags and applies only the ones the user actually set,
// so config-file values survive unless overridden.
class FlagSet {
 public:
  explicit FlagSet(CLI::App* app) : app_(app) {}

  void text(const std::string& flag, const std::string& key, const std::string& help) {
    auto& p = add(key, PendingOption::Kind::text);
    p.opt = app_->add_option(flag, p.text, help);
  }
  void integer(const std::string& flag, const std::string& key, const std::string& help) {
    auto& p = add(key, PendingOption::Kind::integer);
    p.opt = app_->add_option(flag, p.integer, help);
  }
  void floating(const std::string& flag, const std::string& key, const std::string& help) {
    auto& p = add(key, PendingOption::Kind::floating);
    p.opt = app_->add_option(flag, p.floating, help);
  }
  void int_list(const std::string& flag, const std::string& key, const std::string& help) {
    auto& p = add(key, PendingOption::Kind::int_list);
    p.opt = app_->add_option(flag, p.int_list, help)->delimiter(',');
  }
  void flag(const std::string& name, const std::string& key, const std::string& help) {
    auto& p = add(key, PendingOption::Kind::flag);
    p.opt = app_->add_flag(name, p.flag, help);
  }

  void apply(json& cfg) const {
    for (const auto& p : pending_) {
      if (p->opt->count() == 0) continue;
      switch (p->kind) {
        case PendingOption::Kind::text: cfg[p->key] = p->text; break;
        case PendingOption::Kind::integer: cfg[p->key] = p->integer; break;
        case PendingOption::Kind::floating: cfg[p->key] = p->floating; break;
        case PendingOption::Kind::int_list: cfg[p->key] = p->int_list; break;
        case PendingOption::Kind::flag: cfg[p->key] = p->flag; break;
      }
    }
  }

 private:
  PendingOption& add(const std::string& key, PendingOption::Kind kind) {
    pending_.push_back(std::make_unique<PendingOption>());
    pending_.back()->key = key;
    pending_.back()->kind = kind;
    return *pending_.back();
  }

  CLI::App* app_;
  std::vector<std::unique_ptr<PendingOption>> pending_;
};

void add_domain_weight(FlagSet& fs) {
  fs.text("--domain", "domain",
          "domain spec: interval:a,b | realline | halfline | disk:cx,cy,r | plane | cap:lo,hi");
  fs.text("--weight", "weight",
          "weight spec: zero | gaussian:t | cauchy-log:c | laguerre:l,s | stieltjes-wigert:c | "
          "neg-potential:file | table:file");
}

void add_mcmc(FlagSet& fs) {
  fs.integer("--k", "k", "number of particles");
  fs.floating("--beta", "beta", "inverse-temperature parameter");
  fs.text("--convention", "convention", "external-field exponent convention: k | k-1");
  fs.floating("--step", "step", "proposal step size");
  fs.integer("--sweeps", "sweeps", "total sweeps per chain");
  fs.integer("--burn-in", "burn_in", "sweeps discarded before retention");
  fs.integer("--thinning", "thinning", "retain every this-many sweeps");
  fs.integer("--chains", "chains", "independent chains");
  fs.integer("--seed", "seed", "root RNG seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for weighted potential theory and Coulomb ensembles"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir = "runs/out";
  long long threads = -1;
  app.add_option("--config", config_path, "JSON config file (flags override its keys)");
  app.add_option("--out", outdir, "output directory");
  app.add_option("--threads", threads, "worker-thread cap (also COULOMB_LAB_THREADS)");

  struct Sub {
    CLI::App* app = nullptr;
    std::unique_ptr<FlagSet> flags;
    std::string command;
  };
  std::vector<Sub> subs;

  auto make_sub = [&](const std::string& name, const std::string& help) -> FlagSet& {
    Sub s;
    s.app = app.add_subcommand(name, help);
    s.app->fallthrough();  // global --config/--out/--threads work after the subcommand too
    s.flags = std::make_unique<FlagSet>(s.app);
    s.command = name;
    subs.push_back(std::move(s));
    return *subs.back().flags;
  };

  {
    FlagSet& fs = make_sub("equilibrium", "solve the weighted equilibrium problem on a grid");
    add_domain_weight(fs);
    fs.integer("--n", "n", "grid cells");
    fs.floating("--tol", "tol", "duality-gap tolerance");
    fs.integer("--max-iter", "max_iter", "iteration budget");
    fs.floating("--support-threshold", "support_threshold", "relative mass cutoff for support");
    fs.flag("--via-sphere", "via_sphere", "force the sphere-chart route for bounded domains");
  }
  {
    FlagSet& fs = make_sub("fekete", "optimize weighted Fekete tuples on a grid");
    add_domain_weight(fs);
    fs.integer("--n", "n", "grid cells");
    fs.integer("--k", "k", "tuple size");
    fs.integer("--restarts", "restarts", "random restarts besides the greedy seed");
    fs.integer("--seed", "seed", "restart RNG seed");
  }
  {
    FlagSet& fs = make_sub("sample", "run the Metropolis-within-Gibbs ensemble sampler");
    add_domain_weight(fs);
    add_mcmc(fs);
  }
  {
    FlagSet& fs = make_sub("zk", "partition-function references and growth study");
    add_domain_weight(fs);
    add_mcmc(fs);
    fs.text("--mode", "mode", "quadrature | mehta | asymptotics");
    fs.int_list("--k-list", "k_list", "particle counts for the growth study");
    fs.integer("--n", "n", "equilibrium grid cells (asymptotics target)");
  }
  {
    FlagSet& fs = make_sub("bm", "sup/L2 norm-comparison constants across degrees");
    add_domain_weight(fs);
    fs.integer("--n", "n", "grid cells");
    fs.int_list("--degrees", "degrees", "polynomial degrees");
  }
  {
    FlagSet& fs = make_sub("ldp", "metric-ball hit probabilities against the rate function");
    add_domain_weight(fs);
    add_mcmc(fs);
    fs.int_list("--k-list", "k_list", "particle counts");
    fs.floating("--radius", "radius", "metric-ball radius");
    fs.integer("--n", "n", "equilibrium grid cells");
    fs.text("--center", "center", "ball center measure CSV (default: equilibrium measure)");
  }
  {
    FlagSet& fs = make_sub("stereo-test", "self-check of the stereographic chart machinery");
    fs.integer("--trials", "trials", "random pairs to probe");
    fs.integer("--seed", "seed", "probe RNG seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (threads >= 0) {
      const std::string v = std::to_string(threads);
      setenv("COULOMB_LAB_THREADS", v.c_str(), 1);
    }
    json cfg = json::object();
    if (!config_path.empty()) {
      cfg = json::parse(coulomb::read_text_file(config_path), nullptr, true, true);
      coulomb::require(cfg.is_object(), coulomb::errc::config, "config file must hold an object");
    }
    for (const auto& s : subs) {
      if (app.got_subcommand(s.app)) {
        cfg["command"] = s.command;
        s.flags->apply(cfg);
        return coulomb::run_experiment(cfg, outdir);
      }
    }
    coulomb::fail(coulomb::errc::config, "no subcommand given");
  } catch (const coulomb::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return coulomb::exit_code_for(e.kind());
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
