#pragma once

// Serialization: CSV measure/point files, JSON summaries, FNV-1a checksums,
// and the textual domain / weight spec mini-grammar used by configs and the
// command line.
//
// Every floating-point value written to CSV goes through "%.17g" so that
// rereading reproduces the exact double; JSON numbers round-trip through
// nlohmann's shortest-exact form.  All writers return the FNV-1a64 checksum
// of the bytes written so run manifests can pin their artifacts.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coulomb/common.hpp"
#include "coulomb/geometry.hpp"
#include "coulomb/measures.hpp"
#include "coulomb/weights.hpp"

#include <json.hpp>

namespace coulomb {

using json = nlohmann::json;

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string checksum_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

// Writes bytes to path and returns the content checksum.
inline std::string write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::config, "cannot open for writing: " + path);
  out << content;
  out.close();
  require(out.good(), errc::config, "write failed: " + path);
  return checksum_hex(content);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::config, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV measures

inline std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::ostringstream out;
  out << "# chart=" << (mu.chart == Chart::sphere ? "sphere" : "plane")
      << " one_dimensional=" << (mu.one_dimensional ? 1 : 0) << "\n";
  out << "re,im,at_infinity,mass,cell_width\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const PlanePoint& p = mu.points[i];
    out << format_double(p.at_infinity ? 0.0 : p.re) << ','
        << format_double(p.at_infinity ? 0.0 : p.im) << ',' << (p.at_infinity ? 1 : 0) << ','
        << format_double(mu.mass[i]) << ','
        << (mu.is_grid() ? format_double(mu.cell_width[i]) : std::string()) << "\n";
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_csv_double(const std::string& s, const char* what) {
  require(!s.empty(), errc::config, std::string("csv: missing ") + what);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(end && *end == '\0', errc::config, std::string("csv: bad number for ") + what);
  return v;
}

}  // namespace detail

inline DiscreteMeasure measure_from_csv(const std::string& content) {
  DiscreteMeasure mu;
  mu.chart = Chart::plane;
  mu.one_dimensional = true;
  std::istringstream in(content);
  std::string line;
  bool header_seen = false;
  bool any_width = false, all_width = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("chart=sphere") != std::string::npos) mu.chart = Chart::sphere;
      if (line.find("one_dimensional=0") != std::string::npos) mu.one_dimensional = false;
      continue;
    }
    if (!header_seen) {  // column header row
      header_seen = true;
      continue;
    }
    const auto cells = detail::split_csv_line(line);
    require(cells.size() >= 4, errc::config, "measure csv: need re,im,at_infinity,mass columns");
    PlanePoint p{detail::parse_csv_double(cells[0], "re"),
                 detail::parse_csv_double(cells[1], "im")};
    if (detail::parse_csv_double(cells[2], "at_infinity") != 0.0) p = PlanePoint::infinity();
    mu.points.push_back(p);
    mu.mass.push_back(detail::parse_csv_double(cells[3], "mass"));
    if (cells.size() >= 5 && !cells[4].empty()) {
      any_width = true;
      mu.cell_width.push_back(detail::parse_csv_double(cells[4], "cell_width"));
    } else {
      all_width = false;
    }
  }
  require(!mu.points.empty(), errc::config, "measure csv: no rows");
  require(!any_width || all_width, errc::config, "measure csv: partial cell_width column");
  mu.validate();
  return mu;
}

// ---------------------------------------------------------------------------
// Spec-string grammar: domains and weights

namespace detail {

inline std::vector<double> parse_number_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(parse_csv_double(cur, what));
  return out;
}

}  // namespace detail

// "interval:a,b" | "realline" | "halfline" | "disk:cx,cy,r" | "plane" |
// "cap:lo,hi" (colatitude range).
inline Domain parse_domain(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "interval") {
    const auto v = detail::parse_number_list(args, "interval bounds");
    require(v.size() == 2, errc::config, "interval:a,b needs two numbers");
    return Domain::interval(v[0], v[1]);
  }
  if (head == "realline") return Domain::real_line();
  if (head == "halfline") return Domain::half_line();
  if (head == "disk") {
    const auto v = detail::parse_number_list(args, "disk parameters");
    require(v.size() == 3, errc::config, "disk:cx,cy,r needs three numbers");
    return Domain::disk(v[0], v[1], v[2]);
  }
  if (head == "plane") return Domain::plane();
  if (head == "cap") {
    const auto v = detail::parse_number_list(args, "cap bounds");
    require(v.size() == 2, errc::config, "cap:lo,hi needs two numbers");
    return Domain::cap(v[0], v[1]);
  }
  fail(errc::config, "unknown domain spec: " + spec);
}

// Weight table file: CSV rows re,im,value with optional "# pole=..." and
// "# sphere_side=1" comments.
inline WeightSpec weight_from_table_csv(const std::string& content) {
  std::vector<PlanePoint> pts;
  std::vector<double> vals;
  double pole = kInf;
  bool sphere_side = false;
  std::istringstream in(content);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto p = line.find("pole=");
      if (p != std::string::npos) pole = std::strtod(line.c_str() + p + 5, nullptr);
      if (line.find("sphere_side=1") != std::string::npos) sphere_side = true;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto cells = detail::split_csv_line(line);
    require(cells.size() >= 3, errc::config, "table weight csv: need re,im,value columns");
    pts.push_back({detail::parse_csv_double(cells[0], "re"),
                   detail::parse_csv_double(cells[1], "im")});
    vals.push_back(detail::parse_csv_double(cells[2], "value"));
  }
  WeightSpec w = WeightSpec::tabulated(std::move(pts), std::move(vals), pole);
  w.table_is_sphere_side = sphere_side;
  return w;
}

// Atom file for external-field weights: CSV rows re,im,mass with optional
// "# atom_width=h" comment.
inline WeightSpec weight_from_atoms_csv(const std::string& content) {
  std::vector<PlanePoint> atoms;
  std::vector<double> mass;
  double width = 0.0;
  std::istringstream in(content);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto p = line.find("atom_width=");
      if (p != std::string::npos) width = std::strtod(line.c_str() + p + 11, nullptr);
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto cells = detail::split_csv_line(line);
    require(cells.size() >= 3, errc::config, "atoms csv: need re,im,mass columns");
    atoms.push_back({detail::parse_csv_double(cells[0], "re"),
                     detail::parse_csv_double(cells[1], "im")});
    mass.push_back(detail::parse_csv_double(cells[2], "mass"));
  }
  std::vector<double> widths;
  if (width > 0.0) widths.assign(atoms.size(), width);
  return WeightSpec::neg_potential(std::move(atoms), std::move(mass), std::move(widths));
}

// "zero" | "gaussian:t" | "cauchy-log:c" | "laguerre:lambda,s" |
// "stieltjes-wigert:c" | "neg-potential:file.csv" | "table:file.csv".
inline WeightSpec parse_weight(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "zero") return WeightSpec::zero();
  if (head == "gaussian") {
    const auto v = detail::parse_number_list(args, "gaussian strength");
    require(v.size() == 1, errc::config, "gaussian:t needs one number");
    return WeightSpec::gaussian(v[0]);
  }
  if (head == "cauchy-log") {
    const auto v = detail::parse_number_list(args, "cauchy-log strength");
    require(v.size() == 1, errc::config, "cauchy-log:c needs one number");
    return WeightSpec::quadratic_log(v[0]);
  }
  if (head == "laguerre") {
    const auto v = detail::parse_number_list(args, "laguerre parameters");
    require(v.size() == 2, errc::config, "laguerre:lambda,s needs two numbers");
    return WeightSpec::laguerre(v[0], v[1]);
  }
  if (head == "stieltjes-wigert") {
    const auto v = detail::parse_number_list(args, "stieltjes-wigert strength");
    require(v.size() == 1, errc::config, "stieltjes-wigert:c needs one number");
    return WeightSpec::stieltjes_wigert(v[0]);
  }
  if (head == "neg-potential") {
    require(!args.empty(), errc::config, "neg-potential needs a file argument");
    return weight_from_atoms_csv(read_text_file(args));
  }
  if (head == "table") {
    require(!args.empty(), errc::config, "table needs a file argument");
    return weight_from_table_csv(read_text_file(args));
  }
  fail(errc::config, "unknown weight spec: " + spec);
}

// ---------------------------------------------------------------------------
// JSON helpers

// Numbers pass through strtod(%.17g) so JSON output is bit-stable regardless
// of how the value was computed.
inline json json_number(double x) {
  if (x == kInf) return "inf";
  if (x == -kInf) return "-inf";
  if (x != x) return "nan";
  return std::strtod(format_double(x).c_str(), nullptr);
}

inline json measure_summary_json(const DiscreteMeasure& mu) {
  json j;
  j["chart"] = mu.chart == Chart::sphere ? "sphere" : "plane";
  j["nodes"] = mu.size();
  j["total_mass"] = json_number(mu.total_mass());
  std::size_t charged = 0;
  for (double m : mu.mass)
    if (m > 0.0) ++charged;
  j["charged_nodes"] = charged;
  return j;
}

}  // namespace coulomb
