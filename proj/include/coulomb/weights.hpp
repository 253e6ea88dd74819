#pragma once

// External-field catalog and admissibility classification.
//
// A weight Q on an unbounded domain is classified by the behavior of
// Q(z) - log|z| as |z| -> infinity:
//   * liminf = M finite   -> weakly admissible (M is the growth constant),
//   * limit  = +infinity  -> admissible (strongly if Q dominates
//                            (1+eps) log|z| beyond some radius),
//   * otherwise           -> not admissible.
// Every catalog entry has a closed-form limit, so classification for them is
// certified symbolically; tabulated weights fall back to radius probes.
//
// The sphere-side field of a weight is Qs(T z) = Q(z) - (1/2) log(1+|z|^2),
// extended to the pole by the growth constant M.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "coulomb/common.hpp"
#include "coulomb/geometry.hpp"

namespace coulomb {

enum class WeightKind {
  zero,
  gaussian,         // t |z|^2, t > 0
  quadratic_log,    // (c/2) log(1 + |z|^2), c > 0
  laguerre,         // lambda x - s log x on [0, inf), lambda > 0, s > 0
  stieltjes_wigert, // c (log x)^2 on [0, inf), c > 0
  neg_potential,    // minus the logarithmic potential of a stored measure
  tabulated,        // values pinned to a fixed node set
};

struct WeightSpec {
  WeightKind kind = WeightKind::zero;
  double t = 1.0;       // gaussian coefficient
  double c = 1.0;       // quadratic_log / stieltjes_wigert coefficient
  double lambda = 1.0;  // laguerre linear coefficient
  double s = 1.0;       // laguerre log coefficient

  // neg_potential: the atoms of the generating measure; `atom_width` (same
  // length, optional) switches the self-evaluation at an atom's own node to
  // the cell-averaged value log(1/h) + 3/2, matching the grid energy.
  std::vector<PlanePoint> atoms;
  std::vector<double> atom_mass;
  std::vector<double> atom_width;

  // tabulated: values index-aligned with `table_points`.  The values are
  // plane-side Q by default; `table_is_sphere_side` marks tables that already
  // hold the lifted field Qs = Q - (1/2) log(1+|x|^2).
  std::vector<PlanePoint> table_points;
  std::vector<double> table_values;
  double pole_value = kInf;  // tabulated value at the infinity marker
  bool table_is_sphere_side = false;

  static WeightSpec zero() { return {}; }
  static WeightSpec gaussian(double t) {
    require(t > 0, errc::config, "gaussian weight needs t > 0");
    WeightSpec w;
    w.kind = WeightKind::gaussian;
    w.t = t;
    return w;
  }
  static WeightSpec quadratic_log(double c) {
    require(c > 0, errc::config, "quadratic-log weight needs c > 0");
    WeightSpec w;
    w.kind = WeightKind::quadratic_log;
    w.c = c;
    return w;
  }
  static WeightSpec laguerre(double lambda, double s) {
    require(lambda > 0 && s > 0, errc::config, "laguerre weight needs lambda > 0 and s > 0");
    WeightSpec w;
    w.kind = WeightKind::laguerre;
    w.lambda = lambda;
    w.s = s;
    return w;
  }
  static WeightSpec stieltjes_wigert(double c) {
    require(c > 0, errc::config, "stieltjes-wigert weight needs c > 0");
    WeightSpec w;
    w.kind = WeightKind::stieltjes_wigert;
    w.c = c;
    return w;
  }
  static WeightSpec neg_potential(std::vector<PlanePoint> atoms, std::vector<double> mass,
                                  std::vector<double> width = {}) {
    require(atoms.size() == mass.size(), errc::config, "neg-potential: atoms/mass mismatch");
    require(width.empty() || width.size() == atoms.size(), errc::config,
            "neg-potential: width length mismatch");
    WeightSpec w;
    w.kind = WeightKind::neg_potential;
    w.atoms = std::move(atoms);
    w.atom_mass = std::move(mass);
    w.atom_width = std::move(width);
    return w;
  }
  static WeightSpec tabulated(std::vector<PlanePoint> pts, std::vector<double> vals,
                              double pole = kInf) {
    require(pts.size() == vals.size(), errc::config, "tabulated weight: size mismatch");
    WeightSpec w;
    w.kind = WeightKind::tabulated;
    w.table_points = std::move(pts);
    w.table_values = std::move(vals);
    w.pole_value = pole;
    return w;
  }
};

// Domain compatibility: laguerre / stieltjes-wigert need the nonnegative axis.
inline void check_weight_domain(const WeightSpec& w, const Domain& d) {
  if (w.kind == WeightKind::laguerre || w.kind == WeightKind::stieltjes_wigert) {
    const bool ok = d.kind == DomainKind::half_line ||
                    (d.kind == DomainKind::interval && d.a >= 0.0);
    require(ok, errc::admissibility, "weight requires a domain inside [0, infinity)");
  }
}

inline double eval_weight(const WeightSpec& w, const PlanePoint& p) {
  if (p.at_infinity) {
    switch (w.kind) {
      case WeightKind::zero: return 0.0;
      case WeightKind::tabulated: return w.pole_value;
      default: return kInf;  // every growing catalog weight blows up at infinity
    }
  }
  switch (w.kind) {
    case WeightKind::zero:
      return 0.0;
    case WeightKind::gaussian:
      return w.t * p.abs2();
    case WeightKind::quadratic_log:
      return 0.5 * w.c * std::log1p(p.abs2());
    case WeightKind::laguerre: {
      require(std::abs(p.im) <= 1e-12 && p.re >= -1e-12, errc::config,
              "laguerre weight evaluated outside [0, infinity)");
      if (p.re <= 0.0) return kInf;
      return w.lambda * p.re - w.s * std::log(p.re);
    }
    case WeightKind::stieltjes_wigert: {
      require(std::abs(p.im) <= 1e-12 && p.re >= -1e-12, errc::config,
              "stieltjes-wigert weight evaluated outside [0, infinity)");
      if (p.re <= 0.0) return kInf;
      const double l = std::log(p.re);
      return w.c * l * l;
    }
    case WeightKind::neg_potential: {
      accumulator acc;
      for (std::size_t j = 0; j < w.atoms.size(); ++j) {
        const double dr = p.re - w.atoms[j].re, di = p.im - w.atoms[j].im;
        const double dist = std::sqrt(dr * dr + di * di);
        if (dist == 0.0) {
          if (!w.atom_width.empty() && w.atom_width[j] > 0.0) {
            acc.add(-w.atom_mass[j] * (std::log(1.0 / w.atom_width[j]) + 1.5));
            continue;
          }
          return -kInf;  // caught by the floor check downstream
        }
        acc.add(w.atom_mass[j] * std::log(dist));
      }
      return acc.value();
    }
    case WeightKind::tabulated: {
      // exact node match (tables are index-aligned with a grid)
      for (std::size_t j = 0; j < w.table_points.size(); ++j) {
        if (std::abs(w.table_points[j].re - p.re) <= 1e-12 &&
            std::abs(w.table_points[j].im - p.im) <= 1e-12)
          return w.table_values[j];
      }
      fail(errc::unsupported, "tabulated weight evaluated off its node set");
    }
  }
  return kNaN;
}

// ---------------------------------------------------------------------------
// Admissibility

enum class AdmissibilityClass {
  not_admissible,
  weakly_admissible,
  admissible,
  strongly_admissible,
  inconclusive,
};

inline const char* to_string(AdmissibilityClass c) {
  switch (c) {
    case AdmissibilityClass::not_admissible: return "not-admissible";
    case AdmissibilityClass::weakly_admissible: return "weakly-admissible";
    case AdmissibilityClass::admissible: return "admissible";
    case AdmissibilityClass::strongly_admissible: return "strongly-admissible";
    case AdmissibilityClass::inconclusive: return "inconclusive";
  }
  return "?";
}

// M_estimate is finite exactly for the weakly admissible class:
// +inf for (strongly) admissible, -inf for not admissible, NaN if inconclusive.
struct AdmissibilityReport {
  AdmissibilityClass cls = AdmissibilityClass::inconclusive;
  double M_estimate = kNaN;
  bool certified = false;  // symbolic limit vs numerical probing
  std::vector<double> probe_radii;
  std::vector<double> probe_values;  // min over the circle of Q - log r
};

namespace detail {

inline double probe_growth(const WeightSpec& w, const Domain& d, double r) {
  // min over the radius-r slice of the domain of Q(z) - log r
  double best = kInf;
  auto consider = [&](double x, double y) {
    PlanePoint p{x, y, false};
    if (!d.contains(p)) return;
    best = std::min(best, eval_weight(w, p) - std::log(r));
  };
  if (d.kind == DomainKind::half_line) {
    consider(r, 0.0);
  } else if (d.kind == DomainKind::real_line) {
    consider(r, 0.0);
    consider(-r, 0.0);
  } else {
    for (int a = 0; a < 16; ++a) {
      const double phi = 2.0 * 3.14159265358979323846 * a / 16.0;
      consider(r * std::cos(phi), r * std::sin(phi));
    }
  }
  return best;
}

}  // namespace detail

inline AdmissibilityReport classify_admissibility(const WeightSpec& w, const Domain& d,
                                                  std::vector<double> radii = {10.0, 100.0, 1e3,
                                                                               1e4, 1e5}) {
  std::sort(radii.begin(), radii.end());
  AdmissibilityReport rep;
  rep.probe_radii = radii;
  if (!(d.kind == DomainKind::sphere_cap)) {
    for (double r : radii) rep.probe_values.push_back(detail::probe_growth(w, d, r));
  }

  if (d.is_bounded()) {
    rep.cls = AdmissibilityClass::strongly_admissible;
    rep.M_estimate = kInf;
    rep.certified = true;
    return rep;
  }

  rep.certified = true;
  switch (w.kind) {
    case WeightKind::zero:
      rep.cls = AdmissibilityClass::not_admissible;
      rep.M_estimate = -kInf;
      return rep;
    case WeightKind::gaussian:
    case WeightKind::laguerre:
    case WeightKind::stieltjes_wigert:
      rep.cls = AdmissibilityClass::strongly_admissible;
      rep.M_estimate = kInf;
      return rep;
    case WeightKind::quadratic_log:
      if (w.c > 1.0) {
        rep.cls = AdmissibilityClass::strongly_admissible;
        rep.M_estimate = kInf;
      } else if (w.c == 1.0) {
        // (1/2) log(1+r^2) - log r -> 0, a true limit
        rep.cls = AdmissibilityClass::weakly_admissible;
        rep.M_estimate = 0.0;
      } else {
        rep.cls = AdmissibilityClass::not_admissible;
        rep.M_estimate = -kInf;
      }
      return rep;
    case WeightKind::neg_potential: {
      double total = 0.0;
      for (double m : w.atom_mass) total += m;
      if (std::abs(total - 1.0) <= 1e-12) {
        // -U^mu(z) - log|z| = sum_j m_j log|1 - t_j/z| -> 0
        rep.cls = AdmissibilityClass::weakly_admissible;
        rep.M_estimate = 0.0;
      } else if (total > 1.0) {
        rep.cls = AdmissibilityClass::strongly_admissible;
        rep.M_estimate = kInf;
      } else {
        rep.cls = AdmissibilityClass::not_admissible;
        rep.M_estimate = -kInf;
      }
      return rep;
    }
    case WeightKind::tabulated:
      break;  // probe below
  }

  // Numerical probing (tabulated weights only).
  rep.certified = false;
  const auto& v = rep.probe_values;
  if (v.size() < 2) {
    rep.cls = AdmissibilityClass::inconclusive;
    return rep;
  }
  bool increasing = true, decreasing = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1] - 1e-9) increasing = false;
    if (v[i] > v[i - 1] + 1e-9) decreasing = false;
  }
  const double last = v.back(), first = v.front();
  if (increasing && last > first + 2.0) {
    rep.cls = AdmissibilityClass::admissible;
    rep.M_estimate = kInf;
  } else if (std::abs(last - v[v.size() - 2]) < 1e-3) {
    rep.cls = AdmissibilityClass::weakly_admissible;
    rep.M_estimate = last;
  } else if (decreasing && last < first - 2.0) {
    rep.cls = AdmissibilityClass::not_admissible;
    rep.M_estimate = -kInf;
  } else {
    rep.cls = AdmissibilityClass::inconclusive;
    rep.M_estimate = kNaN;
  }
  return rep;
}

// Sphere-side values of Q on the nodes of `grid`, computed through the
// pullback coordinates: Qs_i = Q(x_i) - (1/2) log(1 + |x_i|^2).  Works for
// any growth class (admissible weights simply blow up toward the pole).
inline std::vector<double> sphere_field_on_grid(const WeightSpec& w, const Grid& grid) {
  require(grid.chart == Chart::sphere, errc::contract, "sphere_field_on_grid: plane-chart grid");
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PlanePoint& p = grid.points[i];
    const double q = eval_weight(w, p);
    out[i] = p.at_infinity ? q : q - 0.5 * std::log1p(p.abs2());
    require(out[i] > -kInf, errc::contract, "weight value -infinity on a grid node");
  }
  return out;
}

// Contract-checked lift to a tabulated sphere weight.  Only weights with a
// finite growth constant M transfer; (strongly) admissible ones must go
// through the solver's admissible pathway, where the pole value is +infinity.
inline WeightSpec to_sphere_weight(const WeightSpec& w, const Domain& d, const Grid& grid) {
  const AdmissibilityReport rep = classify_admissibility(w, d);
  if (rep.cls != AdmissibilityClass::weakly_admissible || !std::isfinite(rep.M_estimate)) {
    fail(errc::admissibility,
         std::string("to_sphere_weight: weight is ") + to_string(rep.cls) +
             "; a finite growth constant is required (admissible weights take the "
             "pole-value +infinity pathway inside the solver)");
  }
  WeightSpec out =
      WeightSpec::tabulated(grid.points, sphere_field_on_grid(w, grid), rep.M_estimate);
  out.table_is_sphere_side = true;
  return out;
}

}  // namespace coulomb
