#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "coulomb/io.hpp"

namespace fs = std::filesystem;
using coulomb::json;

namespace {

std::string bin() {
#ifdef COULOMB_LAB_BIN
  return COULOMB_LAB_BIN;
#else
  const char* b = std::getenv("COULOMB_LAB_BIN");
  REQUIRE(b != nullptr);
  return b;
#endif
}

int run(const std::string& args) {
  const std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() /
                     ("coulomb_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

}  // namespace

TEST_CASE("help exits cleanly") {
  REQUIRE(run("--help") == 0);
  REQUIRE(run("equilibrium --help") == 0);
}

TEST_CASE("missing subcommand and bad flags are config errors") {
  REQUIRE(run("") == 2);
  REQUIRE(run("equilibrium --no-such-flag 1") == 2);
}

TEST_CASE("stereo self-check passes and records a verified checksum") {
  const fs::path dir = fresh_dir("stereo");
  REQUIRE(run("stereo-test --trials 2000 --out " + dir.string()) == 0);
  REQUIRE(fs::exists(dir / "stereo.json"));
  REQUIRE(fs::exists(dir / "manifest.json"));
  const json summary = json::parse(coulomb::read_text_file((dir / "stereo.json").string()));
  REQUIRE(summary["pass"].get<bool>());
  const json manifest = json::parse(coulomb::read_text_file((dir / "manifest.json").string()));
  const std::string recorded = manifest["checksums"]["stereo.json"].get<std::string>();
  const std::string body = coulomb::read_text_file((dir / "stereo.json").string());
  REQUIRE(recorded == coulomb::checksum_hex(body));
  fs::remove_all(dir);
}

TEST_CASE("equilibrium run writes parseable artifacts, flags override config") {
  const fs::path dir = fresh_dir("eq");
  const fs::path cfg = dir / "config.json";
  // the n here loses to the command-line override below
  write_file(cfg, "{\"n\": 10, \"tol\": 1e-8}\n");
  REQUIRE(run("equilibrium --config " + cfg.string() +
              " --domain interval:-1,1 --n 250 --out " + dir.string()) == 0);
  const coulomb::DiscreteMeasure mu =
      coulomb::measure_from_csv(coulomb::read_text_file((dir / "measure.csv").string()));
  REQUIRE(mu.size() == 250);
  REQUIRE(mu.is_probability());
  const json summary = json::parse(coulomb::read_text_file((dir / "summary.json").string()));
  REQUIRE(std::abs(summary["V_w"].get<double>() - std::log(2.0)) < 5e-3);
  REQUIRE(summary["converged"].get<bool>());
  const json manifest = json::parse(coulomb::read_text_file((dir / "manifest.json").string()));
  REQUIRE(manifest["config"]["n"].get<int>() == 250);
  REQUIRE(fs::exists(dir / "frostman.csv"));
  fs::remove_all(dir);
}

TEST_CASE("unknown config keys and broken json are schema errors") {
  const fs::path dir = fresh_dir("badcfg");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, "{\"n\": 40, \"typo_key\": 1}\n");
  REQUIRE(run("equilibrium --config " + cfg.string() + " --out " + dir.string()) == 2);
  write_file(cfg, "{not json at all\n");
  REQUIRE(run("equilibrium --config " + cfg.string() + " --out " + dir.string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("non-admissible weight on an unbounded domain exits with the dedicated code") {
  const fs::path dir = fresh_dir("adm");
  REQUIRE(run("equilibrium --domain realline --weight zero --n 100 --out " +
              dir.string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("sampler artifacts are byte-identical across thread caps") {
  const fs::path d1 = fresh_dir("det1");
  const fs::path d4 = fresh_dir("det4");
  const std::string args =
      "sample --domain interval:-1,1 --k 4 --sweeps 400 --burn-in 100 --chains 2 "
      "--seed 5 ";
  REQUIRE(run(args + "--threads 1 --out " + d1.string()) == 0);
  REQUIRE(run(args + "--threads 4 --out " + d4.string()) == 0);
  for (const char* name : {"samples.csv", "diagnostics.json"}) {
    const std::string a = coulomb::read_text_file((d1 / name).string());
    const std::string b = coulomb::read_text_file((d4 / name).string());
    REQUIRE(a == b);
  }
  // manifests differ in wall clock but agree on every artifact checksum
  const json m1 = json::parse(coulomb::read_text_file((d1 / "manifest.json").string()));
  const json m4 = json::parse(coulomb::read_text_file((d4 / "manifest.json").string()));
  REQUIRE(m1["checksums"] == m4["checksums"]);
  fs::remove_all(d1);
  fs::remove_all(d4);
}

TEST_CASE("fekete command emits the tuple") {
  const fs::path dir = fresh_dir("fek");
  REQUIRE(run("fekete --domain interval:-1,1 --n 41 --k 3 --out " + dir.string()) == 0);
  const std::string pts = coulomb::read_text_file((dir / "points.csv").string());
  REQUIRE(std::count(pts.begin(), pts.end(), '\n') == 4);  // header + 3 rows
  const json f = json::parse(coulomb::read_text_file((dir / "fekete.json").string()));
  REQUIRE(std::abs(f["delta_k"].get<double>() - std::cbrt(2.0)) < 1e-12);
  fs::remove_all(dir);
}

TEST_CASE("closed-form partition reference is exposed through the cli") {
  const fs::path dir = fresh_dir("zk");
  REQUIRE(run("zk --mode mehta --domain realline --weight gaussian:1 --k 3 --out " +
              dir.string()) == 0);
  REQUIRE(fs::exists(dir / "zk.json"));
  fs::remove_all(dir);
}
