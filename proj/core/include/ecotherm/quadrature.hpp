#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>

namespace ecotherm {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Integration range; either endpoint may be infinite.
struct Interval {
  double lower;
  double upper;

  bool finite() const noexcept { return lower > -inf && upper < inf; }
  double length() const noexcept { return upper - lower; }
};

// Throws Error unless lower < upper and neither endpoint is NaN.
void validate(const Interval& interval);

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int subdivisions = 0;
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  int max_subdivisions = 2000;
};

using Integrand = std::function<double(double)>;

// Globally adaptive 15-point Gauss-Kronrod quadrature.
//
// Infinite ranges are folded onto [0, 1): a semi-infinite range [a, inf) uses
//   lambda = a + expm1(t / (1 - t)),
// which turns power-law tails into exponentially decaying ones, and a doubly
// infinite range is split at 0 into two semi-infinite pieces. The mapped
// range stops where |lambda - a| reaches e^300; the remainder is extrapolated
// from the last samples as a power law times a power of ln(lambda), and an
// unresolved remainder is a ConvergenceError.
//
// The error target is max(rel_tol |value|, abs_tol, 100 eps integral of |f|).
//
// Throws DivergenceError when the integrand is non-integrable (non-finite
// panel sums, or sums that keep growing as the offending panel is halved),
// ConvergenceError when the tolerance is not met within max_subdivisions,
// and Error on NaN integrand values or an invalid interval/tolerance.
QuadResult integrate_1d(const Integrand& f, const Interval& interval, const QuadOptions& options = {});

inline QuadResult integrate_1d(const Integrand& f, const Interval& interval, double rel_tol) {
  QuadOptions options;
  options.rel_tol = rel_tol;
  return integrate_1d(f, interval, options);
}

// Iterated integral over the box given by intervals (dimension 1..3). The
// callback receives the full point; inner integrals use options.rel_tol
// scaled down by 10 per nesting level and no absolute tolerance.
using MultiIntegrand = std::function<double(std::span<const double>)>;
QuadResult integrate_nd(const MultiIntegrand& f, std::span<const Interval> intervals,
                        const QuadOptions& options = {});

}  // namespace ecotherm
