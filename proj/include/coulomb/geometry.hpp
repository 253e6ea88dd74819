#pragma once

// Plane/sphere geometry: the inverse stereographic lift onto the sphere of
// radius 1/2 tangent to the plane at the origin, the chordal metric, domains
// and their discretization grids.
//
// The lift sends z = x + iy to
//   T(z) = (x, y, |z|^2) / (1 + |z|^2),        T(infinity) = (0, 0, 1),
// and satisfies  |T(z) - T(u)| = |z - u| / sqrt(1+|z|^2) / sqrt(1+|u|^2).
// Unbounded domains are discretized on the sphere chart so that a
// neighborhood of the pole (0,0,1) is covered by finitely many cells.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "coulomb/common.hpp"

namespace coulomb {

struct PlanePoint {
  double re = 0.0;
  double im = 0.0;
  bool at_infinity = false;

  static PlanePoint infinity() { return {0.0, 0.0, true}; }
  double abs2() const { return re * re + im * im; }
};

inline bool operator==(const PlanePoint& a, const PlanePoint& b) {
  if (a.at_infinity || b.at_infinity) return a.at_infinity && b.at_infinity;
  return a.re == b.re && a.im == b.im;
}

// A point of the sphere S = { x^2 + y^2 + (z - 1/2)^2 = 1/4 }.
struct SpherePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double sphere_defect(const SpherePoint& p) {
  const double dz = p.z - 0.5;
  return std::abs(p.x * p.x + p.y * p.y + dz * dz - 0.25);
}

inline SpherePoint make_sphere_point(double x, double y, double z) {
  SpherePoint p{x, y, z};
  require(sphere_defect(p) <= 1e-12, errc::invalid_point,
          "point is not on the radius-1/2 sphere");
  return p;
}

inline SpherePoint stereo_project(const PlanePoint& z) {
  if (z.at_infinity) return {0.0, 0.0, 1.0};
  const double d = 1.0 + z.abs2();
  return {z.re / d, z.im / d, z.abs2() / d};
}

inline PlanePoint stereo_inverse(const SpherePoint& p) {
  require(sphere_defect(p) <= 1e-12, errc::invalid_point,
          "stereo_inverse: point is off the sphere");
  const double denom = 1.0 - p.z;
  if (denom <= 1e-15) return PlanePoint::infinity();
  return {p.x / denom, p.y / denom, false};
}

inline double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double chordal_distance(const PlanePoint& a, const PlanePoint& b) {
  if (a.at_infinity && b.at_infinity) return 0.0;
  if (a.at_infinity) return 1.0 / std::sqrt(1.0 + b.abs2());
  if (b.at_infinity) return 1.0 / std::sqrt(1.0 + a.abs2());
  const double dr = a.re - b.re, di = a.im - b.im;
  return std::sqrt((dr * dr + di * di) / ((1.0 + a.abs2()) * (1.0 + b.abs2())));
}

// ---------------------------------------------------------------------------
// Domains

enum class DomainKind { interval, real_line, half_line, disk, plane, sphere_cap };

struct Domain {
  DomainKind kind = DomainKind::interval;
  // interval: [a, b]; disk: center (a, b), radius r;
  // sphere_cap: colatitude range [a, b] measured from (0,0,0) (so [0, pi] is
  // the whole sphere and b = pi includes the pole (0,0,1)).
  double a = -1.0;
  double b = 1.0;
  double r = 1.0;

  static Domain interval(double a, double b) {
    require(a < b, errc::config, "interval needs a < b");
    return {DomainKind::interval, a, b, 0.0};
  }
  static Domain real_line() { return {DomainKind::real_line, 0, 0, 0}; }
  static Domain half_line() { return {DomainKind::half_line, 0, 0, 0}; }
  static Domain disk(double cx, double cy, double radius) {
    require(radius > 0, errc::config, "disk needs radius > 0");
    return {DomainKind::disk, cx, cy, radius};
  }
  static Domain plane() { return {DomainKind::plane, 0, 0, 0}; }
  static Domain cap(double alpha_lo, double alpha_hi) {
    require(0.0 <= alpha_lo && alpha_lo < alpha_hi && alpha_hi <= 3.14159265358979323846 + 1e-12,
            errc::config, "sphere cap needs 0 <= lo < hi <= pi");
    return {DomainKind::sphere_cap, alpha_lo, alpha_hi, 0.0};
  }

  bool is_bounded() const {
    return kind == DomainKind::interval || kind == DomainKind::disk ||
           (kind == DomainKind::sphere_cap && b < 3.14159265358979323846 - 1e-12);
  }
  bool on_sphere_chart() const {
    return kind == DomainKind::real_line || kind == DomainKind::half_line ||
           kind == DomainKind::plane || kind == DomainKind::sphere_cap;
  }
  bool contains(const PlanePoint& p) const {
    constexpr double eps = 1e-12;
    switch (kind) {
      case DomainKind::interval:
        return !p.at_infinity && std::abs(p.im) <= eps && p.re >= a - eps && p.re <= b + eps;
      case DomainKind::real_line:
        return p.at_infinity || std::abs(p.im) <= eps;
      case DomainKind::half_line:
        return p.at_infinity || (std::abs(p.im) <= eps && p.re >= -eps);
      case DomainKind::disk: {
        if (p.at_infinity) return false;
        const double dx = p.re - a, dy = p.im - b;
        return dx * dx + dy * dy <= r * r + eps;
      }
      case DomainKind::plane:
        return true;
      case DomainKind::sphere_cap: {
        const SpherePoint s = stereo_project(p);
        const double alpha = std::atan2(std::hypot(s.x, s.y), 0.5 - s.z);
        return alpha >= a - 1e-9 && alpha <= b + 1e-9;
      }
    }
    return false;
  }
};

// ---------------------------------------------------------------------------
// Grids

enum class Chart { plane, sphere };

enum class PoleTruncation { cap_include, cap_exclude };

// A grid is a cell decomposition with nodes at cell midpoints.  `points`
// always holds plane-chart coordinates (for sphere charts: the stereographic
// pullback, possibly very large near the pole).  `cell_measure` is the
// base-measure (Lebesgue / surface) mass of each cell; for unbounded domains
// the pole-adjacent cell mass is truncated to a large finite value.
// `spacing` is the chart-side cell width (arc length / sqrt(area)) used by the
// diagonally corrected energy.
struct Grid {
  Chart chart = Chart::plane;
  Domain domain;
  bool one_dimensional = true;
  std::vector<PlanePoint> points;
  std::vector<SpherePoint> sphere_points;  // empty on the plane chart
  std::vector<double> cell_measure;
  std::vector<double> spacing;

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline SpherePoint circle_point(double theta) {
  return {0.5 * std::sin(theta), 0.0, 0.5 * (1.0 - std::cos(theta))};
}

// Lebesgue mass of the pullback of the great-circle arc [lo, hi]; theta = +-pi
// is the pole, whose cell is truncated at an offset of trunc (radians).
inline double line_cell_mass(double lo, double hi, double trunc) {
  constexpr double pi = 3.14159265358979323846;
  const double hi_eff = std::min(hi, pi - trunc);
  const double lo_eff = std::max(lo, -pi + trunc);
  return std::tan(hi_eff / 2.0) - std::tan(lo_eff / 2.0);
}

// splits total into n_rings nonnegative integers proportional to `share`,
// each at least 1 (largest-remainder rounding).
inline std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& share) {
  const std::size_t nr = share.size();
  double sum = 0.0;
  for (double s : share) sum += s;
  std::vector<std::size_t> out(nr, 1);
  std::size_t left = total - std::min(total, nr);
  std::vector<std::pair<double, std::size_t>> frac(nr);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < nr; ++i) {
    const double ideal = left * share[i] / sum;
    const std::size_t whole = static_cast<std::size_t>(ideal);
    out[i] += whole;
    assigned += whole;
    frac[i] = {ideal - whole, i};
  }
  std::sort(frac.begin(), frac.end(), [](auto& a, auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t j = 0; j < left - assigned; ++j) out[frac[j % nr].second] += 1;
  return out;
}

}  // namespace detail

// n is the number of cells for one-dimensional domains and the approximate
// cell count (ring x sector decomposition, exact total n) for area domains.
inline Grid build_grid(const Domain& d, std::size_t n,
                       PoleTruncation pole = PoleTruncation::cap_include) {
  constexpr double pi = 3.14159265358979323846;
  require(n >= 2, errc::config, "build_grid: need at least 2 cells");
  Grid g;
  g.domain = d;
  switch (d.kind) {
    case DomainKind::interval: {
      g.chart = Chart::plane;
      g.one_dimensional = true;
      const double h = (d.b - d.a) / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        g.points.push_back({d.a + h * (static_cast<double>(i) + 0.5), 0.0, false});
        g.cell_measure.push_back(h);
        g.spacing.push_back(h);
      }
      break;
    }
    case DomainKind::real_line:
    case DomainKind::half_line: {
      g.chart = Chart::sphere;
      g.one_dimensional = true;
      const bool half = (d.kind == DomainKind::half_line);
      double lo = half ? 0.0 : -pi;
      double hi = pi;
      double dth = (hi - lo) / static_cast<double>(n);
      if (pole == PoleTruncation::cap_exclude) {
        hi -= dth;
        if (!half) lo += dth;
        dth = (hi - lo) / static_cast<double>(n);
      }
      const double trunc = (pole == PoleTruncation::cap_include) ? dth * 1e-3 : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t0 = lo + dth * static_cast<double>(i);
        const double t1 = t0 + dth;
        const double tm = 0.5 * (t0 + t1);
        const SpherePoint sp = detail::circle_point(tm);
        g.sphere_points.push_back(sp);
        g.points.push_back({std::tan(tm / 2.0), 0.0, false});
        g.cell_measure.push_back(detail::line_cell_mass(t0, t1, trunc));
        g.spacing.push_back(0.5 * dth);  // arc length, radius 1/2
      }
      break;
    }
    case DomainKind::disk: {
      g.chart = Chart::plane;
      g.one_dimensional = false;
      const std::size_t nr = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(n / 4.0)));
      const double dr = d.r / static_cast<double>(nr);
      std::vector<double> share(nr);
      for (std::size_t i = 0; i < nr; ++i) share[i] = 2.0 * static_cast<double>(i) + 1.0;
      const auto sectors = detail::apportion(n, share);
      for (std::size_t i = 0; i < nr; ++i) {
        const double r0 = dr * static_cast<double>(i), r1 = r0 + dr;
        const double rm = 0.5 * (r0 + r1);
        const double dphi = 2.0 * pi / static_cast<double>(sectors[i]);
        for (std::size_t j = 0; j < sectors[i]; ++j) {
          const double phi = dphi * (static_cast<double>(j) + 0.5);
          g.points.push_back({d.a + rm * std::cos(phi), d.b + rm * std::sin(phi), false});
          const double area = 0.5 * (r1 * r1 - r0 * r0) * dphi;
          g.cell_measure.push_back(area);
          g.spacing.push_back(std::sqrt(area));
        }
      }
      break;
    }
    case DomainKind::plane:
    case DomainKind::sphere_cap: {
      g.chart = Chart::sphere;
      g.one_dimensional = false;
      const double alo = (d.kind == DomainKind::plane) ? 0.0 : d.a;
      const double ahi = (d.kind == DomainKind::plane) ? pi : d.b;
      const bool has_pole = ahi >= pi - 1e-12;
      const std::size_t nr = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(n / 4.0)));
      const double da = (ahi - alo) / static_cast<double>(nr);
      std::vector<double> share(nr);
      for (std::size_t i = 0; i < nr; ++i) {
        const double a0 = alo + da * static_cast<double>(i);
        share[i] = std::cos(a0) - std::cos(a0 + da);  // zone area share
      }
      const auto sectors = detail::apportion(n, share);
      const double trunc = da * 1e-3;
      for (std::size_t i = 0; i < nr; ++i) {
        const double a0 = alo + da * static_cast<double>(i), a1 = a0 + da;
        const double am = 0.5 * (a0 + a1);
        const double dphi = 2.0 * pi / static_cast<double>(sectors[i]);
        for (std::size_t j = 0; j < sectors[i]; ++j) {
          const double phi = dphi * (static_cast<double>(j) + 0.5);
          const SpherePoint sp{0.5 * std::sin(am) * std::cos(phi),
                               0.5 * std::sin(am) * std::sin(phi),
                               0.5 * (1.0 - std::cos(am))};
          g.sphere_points.push_back(sp);
          const double rho = std::tan(am / 2.0);
          g.points.push_back({rho * std::cos(phi), rho * std::sin(phi), false});
          double area;
          if (d.kind == DomainKind::sphere_cap) {
            area = 0.25 * (std::cos(a0) - std::cos(a1)) * dphi;  // surface measure
          } else {
            // Lebesgue pullback; the pole ring is truncated.
            const double a1_eff = (has_pole && i + 1 == nr) ? pi - trunc : a1;
            const double t0 = std::tan(a0 / 2.0), t1 = std::tan(a1_eff / 2.0);
            area = 0.5 * (t1 * t1 - t0 * t0) * dphi;
          }
          g.cell_measure.push_back(area);
          g.spacing.push_back(std::sqrt(0.25 * (std::cos(a0) - std::cos(a1)) * dphi));
        }
      }
      break;
    }
  }
  return g;
}

}  // namespace coulomb
