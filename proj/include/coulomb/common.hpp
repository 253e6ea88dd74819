#pragma once

// Shared error taxonomy, numeric helpers and the thread-cap knob used by the
// rest of the library.  Nothing here depends on any other coulomb header.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace coulomb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kPi = 3.14159265358979323846;

// Error kinds map one-to-one onto the CLI exit-code contract:
// config -> 2, admissibility -> 3, non_convergence -> 4, everything else is a
// programming/contract violation surfaced as exit 2 as well.
enum class errc {
  config,
  admissibility,
  non_convergence,
  invalid_point,
  north_pole_mass,
  unbounded_potential,
  coincident_points,
  degenerate_measure,
  singular_configuration,
  unsupported,
  contract,
};

class error : public std::runtime_error {
public:
  error(errc kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  errc kind() const noexcept { return kind_; }

private:
  errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& what) { throw error(kind, what); }

inline void require(bool ok, errc kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

// Neumaier-compensated sum; the energy accumulations difference terms of very
// different magnitude and plain summation loses the 1e-9 shift-covariance
// checks.
inline double stable_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

class accumulator {
public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline bool nearly_equal(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// COULOMB_LAB_THREADS caps worker parallelism; 0/unset means "hardware".
inline unsigned thread_cap() {
  if (const char* env = std::getenv("COULOMB_LAB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return 0;
}

}  // namespace coulomb
