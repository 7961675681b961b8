#include "ecotherm/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ecotherm/error.hpp"

namespace ecotherm {

namespace {

// Kronrod abscissae (descending, last is the centre) and weights; the Gauss
// weights belong to the odd-indexed abscissae and the centre.
constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double epmach = std::numeric_limits<double>::epsilon();
constexpr double uflow = std::numeric_limits<double>::min();

struct Panel {
  double a, b;
  double value;
  double error;
  double magnitude;  // integral of |g|
  bool refinable = true;
};

bool operator<(const Panel& x, const Panel& y) {
  // Heap order: refinable panels with the largest error first.
  if (x.refinable != y.refinable) return !x.refinable;
  return x.error < y.error;
}

std::string fmt(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6g", v);
  return buf.data();
}

template <class G>
Panel gauss_kronrod(const G& g, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::fabs(half);

  const double fc = g(centre);
  double resg = fc * wg[3];
  double resk = fc * wgk[7];
  double resabs = std::fabs(resk);
  std::array<double, 7> f1{}, f2{};
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    f1[j] = g(centre - dx);
    f2[j] = g(centre + dx);
    const double sum = f1[j] + f2[j];
    resk += wgk[j] * sum;
    resabs += wgk[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
    if (j % 2 == 1) resg += wg[j / 2] * sum;
  }
  const double reskh = resk * 0.5;
  double resasc = wgk[7] * std::fabs(fc - reskh);
  for (std::size_t j = 0; j < 7; ++j)
    resasc += wgk[j] * (std::fabs(f1[j] - reskh) + std::fabs(f2[j] - reskh));

  const double result = resk * half;
  resabs *= abs_half;
  resasc *= abs_half;
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > uflow / (50.0 * epmach)) err = std::max(epmach * 50.0 * resabs, err);

  return {a, b, result, err, resabs, true};
}

double neumaier_sum(const std::vector<Panel>& panels, double Panel::*field) {
  double sum = 0.0, comp = 0.0;
  for (const auto& p : panels) {
    const double v = p.*field;
    const double t = sum + v;
    comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

// Adaptive driver over a transformed integrand g on the given initial panels.
template <class G>
QuadResult adapt(const G& g, const std::vector<std::pair<double, double>>& initial,
                 const QuadOptions& options, double offset = 0.0) {
  std::vector<Panel> heap;
  heap.reserve(static_cast<std::size_t>(options.max_subdivisions) + initial.size() + 2);
  for (auto [a, b] : initial) heap.push_back(gauss_kronrod(g, a, b));

  auto check_finite = [](const Panel& p) {
    if (!std::isfinite(p.value) || !std::isfinite(p.error))
      throw DivergenceError("integral diverges: panel sum is not finite on [" + fmt(p.a) + ", " +
                            fmt(p.b) + "] of the mapped range");
  };
  for (const auto& p : heap) check_finite(p);
  std::make_heap(heap.begin(), heap.end());

  double total = neumaier_sum(heap, &Panel::value);
  double total_err = neumaier_sum(heap, &Panel::error);
  double magnitude = neumaier_sum(heap, &Panel::magnitude);

  std::vector<double> checkpoints;
  int next_checkpoint = 8;
  int subdivisions = 0;

  auto tolerance = [&] {
    return std::max({options.rel_tol * std::fabs(total + offset), options.abs_tol,
                     100.0 * epmach * magnitude});
  };

  while (total_err > tolerance() && subdivisions < options.max_subdivisions) {
    std::pop_heap(heap.begin(), heap.end());
    Panel worst = heap.back();
    if (!worst.refinable) {
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    heap.pop_back();

    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      worst.refinable = false;
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      continue;
    }
    Panel left = gauss_kronrod(g, worst.a, mid);
    Panel right = gauss_kronrod(g, mid, worst.b);
    check_finite(left);
    check_finite(right);

    total += (left.value + right.value) - worst.value;
    total_err += (left.error + right.error) - worst.error;
    magnitude += (left.magnitude + right.magnitude) - worst.magnitude;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    ++subdivisions;

    if (subdivisions % 64 == 0) {
      total = neumaier_sum(heap, &Panel::value);
      total_err = neumaier_sum(heap, &Panel::error);
      magnitude = neumaier_sum(heap, &Panel::magnitude);
    }
    if (!std::isfinite(total) || std::fabs(total) > 1e300)
      throw DivergenceError("integral diverges: running sum exceeds 1e300");
    if (subdivisions == next_checkpoint) {
      checkpoints.push_back(std::fabs(total));
      next_checkpoint *= 2;
    }
  }

  total = neumaier_sum(heap, &Panel::value);
  total_err = neumaier_sum(heap, &Panel::error);
  magnitude = neumaier_sum(heap, &Panel::magnitude);
  QuadResult result{total, total_err, subdivisions};
  if (total_err <= tolerance()) return result;

  // Not converged: separate "keeps growing" from plain failure.
  checkpoints.push_back(std::fabs(total));
  const std::size_t k = checkpoints.size();
  if (k >= 4) {
    const double d1 = checkpoints[k - 3] - checkpoints[k - 4];
    const double d2 = checkpoints[k - 2] - checkpoints[k - 3];
    const double d3 = checkpoints[k - 1] - checkpoints[k - 2];
    if (d1 > 0 && d2 > 0 && d3 > 0 && d3 >= 0.5 * d2 && d2 >= 0.5 * d1)
      throw DivergenceError("integral diverges: panel sums keep growing under subdivision (" +
                            fmt(checkpoints[k - 4]) + " -> " + fmt(checkpoints[k - 1]) + ")");
  }
  throw ConvergenceError("quadrature did not converge after " + std::to_string(subdivisions) +
                         " subdivisions (estimate " + fmt(total) + ", error " + fmt(total_err) +
                         ")");
}

// Semi-infinite ranges are integrated in u = ln(1 + s) up to u_cut, where
// products of two coordinates still fit in a double. Past it the mapped integrand h(u) is
// extrapolated as A e^(-beta u) (u - u0)^k, which is exact for power laws
// times powers of a logarithm.
constexpr double u_cut = 300.0;
// Integrand magnitude below which the far tail is treated as zero.
constexpr double negligible = 1e-250;

struct Tail {
  double value = 0.0;
  double error = 0.0;
};

// e^z z^-k Gamma(k + 1, z), which tends to 1 as z grows.
double scaled_upper_gamma(double k, double z) {
  if (z < 600.0) {
    return boost::math::gamma_q(k + 1.0, z) / boost::math::gamma_p_derivative(k + 1.0, z);
  }
  double term = 1.0, sum = 1.0;
  for (int j = 1; j < 8; ++j) {
    term *= (k + 1.0 - j) / z;
    sum += term;
  }
  return sum;
}

// Integral of h over [u_cut, inf) from samples ending at u_cut with spacing L.
template <class H>
double tail_fit(const H& h, double L) {
  std::array<double, 4> u{}, g{};
  double sign = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    u[j] = u_cut - static_cast<double>(3 - j) * L;
    const double v = h(u[j]);
    if (std::isinf(v)) throw DivergenceError("integral diverges: integrand is unbounded in the far tail");
    if (v == 0.0 || (sign != 0.0 && (v > 0.0) != (sign > 0.0)))
      throw ConvergenceError("integrand far tail is irregular and cannot be extrapolated");
    sign = v > 0.0 ? 1.0 : -1.0;
    g[j] = std::log(std::fabs(v));
  }
  const double d0 = g[2] - 2.0 * g[1] + g[0];
  const double d1 = g[3] - 2.0 * g[2] + g[1];
  const double h_cut = sign * std::exp(g[3]);

  double k = 0.0, u0 = 0.0, beta = 0.0;
  const double scale = 1e-13 * (1.0 + std::fabs(g[3]) + u_cut);
  if (std::fabs(d0) <= scale && std::fabs(d1) <= scale) {
    beta = -(g[3] - g[2]) / L;
  } else {
    auto psi = [&](std::size_t j, double w0) {
      return std::log(u[j + 2] - w0) - 2.0 * std::log(u[j + 1] - w0) + std::log(u[j] - w0);
    };
    // psi0/psi1 falls from +inf to 1 as u0 moves away below u[0].
    const double target = d0 / d1;
    double lo = -30.0, hi = 30.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double w0 = u[0] - std::exp(mid);
      if (psi(0, w0) / psi(1, w0) > target)
        lo = mid;
      else
        hi = mid;
    }
    u0 = u[0] - std::exp(0.5 * (lo + hi));
    k = d1 / psi(1, u0);
    beta = -(g[3] - g[2] - k * (std::log(u[3] - u0) - std::log(u[2] - u0))) / L;
  }
  if (!(beta > scale / L)) {
    if (k >= -1.0) throw DivergenceError("integral diverges: integrand does not decay as a power in the far tail");
    throw ConvergenceError("integrand tail in the far tail cannot be extrapolated");
  }
  if (!(k > -1.0)) throw ConvergenceError("integrand tail in the far tail cannot be extrapolated");
  return h_cut / beta * scaled_upper_gamma(k, beta * (u_cut - u0));
}

// Integral of h over [u_cut, inf) for h = e^(-beta u) (c0 + c1 u + c2 u^2),
// from five samples with spacing L. The fifth sample picks among the roots.
template <class H>
std::optional<double> quadratic_tail_fit(const H& h, double L) {
  std::array<double, 5> v{};
  for (std::size_t j = 0; j < 5; ++j) v[j] = h(u_cut - static_cast<double>(4 - j) * L);
  if (v[4] == 0.0) return std::nullopt;

  // v_j e^(beta u_j) has vanishing third differences; in z = e^(-beta L):
  auto p = [&](double z) { return v[4] - 3.0 * v[3] * z + 3.0 * v[2] * z * z - v[1] * z * z * z; };
  std::vector<double> breaks{0.0, 1.0};
  const double disc = v[2] * v[2] - v[1] * v[3];
  if (v[1] != 0.0 && disc > 0.0)
    for (double sg : {-1.0, 1.0}) {
      const double z = (v[2] + sg * std::sqrt(disc)) / v[1];
      if (z > 0.0 && z < 1.0) breaks.push_back(z);
    }
  std::sort(breaks.begin(), breaks.end());

  std::optional<double> best;
  double best_miss = inf;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double lo = breaks[i], hi = breaks[i + 1];
    const double plo = p(lo);
    if (!(plo * p(hi) < 0.0)) continue;
    for (int it = 0; it < 200 && hi - lo > 4.0 * epmach * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((p(mid) < 0.0) == (plo < 0.0) ? lo : hi) = mid;
    }
    const double z = 0.5 * (lo + hi);
    const double beta = -std::log(z) / L;
    if (!(beta > 0.0)) continue;
    const double r2 = v[2] * z * z, r3 = v[3] * z, r4 = v[4];
    const double d1 = (r4 - r3) / L, d0 = (r3 - r2) / L;
    const double c2 = (d1 - d0) / (2.0 * L);
    const double c1 = d1 + c2 * L;
    const double x = -4.0 * L;
    const double r0 = v[0] * std::pow(z, 4);
    const double miss = std::fabs(r4 + c1 * x + c2 * x * x - r0) / std::fabs(r0);
    if (miss < best_miss) {
      best_miss = miss;
      best = r4 / beta + c1 / (beta * beta) + 2.0 * c2 / (beta * beta * beta);
    }
  }
  return best;
}

// Far tail from whichever model agrees better between two spacings.
template <class H>
Tail power_tail(const H& h) {
  if (h(u_cut) == 0.0) return {};
  std::optional<Tail> power;
  std::optional<ConvergenceError> power_failure;
  try {
    const double wide = tail_fit(h, 80.0);
    const double check = tail_fit(h, 60.0);
    power = Tail{wide, std::fabs(wide - check)};
  } catch (const ConvergenceError& e) {
    power_failure = e;
  }
  std::optional<Tail> quadratic;
  const auto wide = quadratic_tail_fit(h, 60.0);
  const auto check = quadratic_tail_fit(h, 50.0);
  if (wide && check) quadratic = Tail{*wide, std::fabs(*wide - *check)};

  Tail t;
  if (power && quadratic)
    t = power->error <= quadratic->error ? *power : *quadratic;
  else if (power)
    t = *power;
  else if (quadratic)
    t = *quadratic;
  else
    throw *power_failure;
  t.error += 64.0 * epmach * std::fabs(t.value);
  return t;
}

QuadResult finish(QuadResult r, const Tail& tail, const QuadOptions& options) {
  r.value += tail.value;
  r.abs_error_estimate += tail.error;
  if (tail.error > std::max(options.rel_tol * std::fabs(r.value), options.abs_tol))
    throw ConvergenceError("power-law tail in the far tail is not resolved to the requested tolerance (tail " +
                           fmt(tail.value) + ", uncertainty " + fmt(tail.error) + ")");
  return r;
}

void validate_options(const QuadOptions& options) {
  if (!(options.rel_tol > 1e-14 && options.rel_tol < 1e-2))
    throw Error("rel_tol must lie in (1e-14, 1e-2), got " + fmt(options.rel_tol));
  if (!(options.abs_tol >= 0.0)) throw Error("abs_tol must be non-negative");
  if (options.max_subdivisions < 1) throw Error("max_subdivisions must be positive");
}

}  // namespace

void validate(const Interval& interval) {
  if (std::isnan(interval.lower) || std::isnan(interval.upper))
    throw Error("interval bound is NaN");
  if (!(interval.lower < interval.upper))
    throw Error("interval requires lower < upper, got [" + fmt(interval.lower) + ", " +
                fmt(interval.upper) + "]");
}

QuadResult integrate_1d(const Integrand& f, const Interval& interval, const QuadOptions& options) {
  validate(interval);
  validate_options(options);

  auto sample = [&f](double x) {
    const double y = f(x);
    if (std::isnan(y)) throw Error("integrand returned NaN at " + fmt(x));
    return y;
  };

  const double a = interval.lower;
  const double b = interval.upper;

  if (interval.finite()) {
    std::vector<std::pair<double, double>> panels;
    constexpr int n = 4;
    for (int i = 0; i < n; ++i)
      panels.emplace_back(a + (b - a) * i / n, i + 1 == n ? b : a + (b - a) * (i + 1) / n);
    return adapt(sample, panels, options);
  }

  // t in [0, t_cut] -> u = t / (1 - t) in [0, u_cut], s = expm1(u); ds/dt = e^u / (1 - t)^2.
  auto map_tail = [&](double origin, double direction) {
    return [&, origin, direction](double t) {
      const double one_minus = 1.0 - t;
      const double u = t / one_minus;
      const double s = std::expm1(u);
      const double y = sample(origin + direction * s);
      if (y == 0.0) return 0.0;
      return (y * (s + 1.0)) / (one_minus * one_minus);
    };
  };
  auto tail_beyond_cut = [&](double origin, double direction) {
    return power_tail([&, origin, direction](double u) {
      const double y = sample(origin + direction * std::expm1(u));
      return std::fabs(y) < negligible ? 0.0 : y * std::exp(u);
    });
  };

  constexpr double t_cut = u_cut / (1.0 + u_cut);
  std::vector<std::pair<double, double>> unit;
  constexpr int n = 8;
  for (int i = 0; i < n; ++i) unit.emplace_back(t_cut * i / n, i + 1 == n ? t_cut : t_cut * (i + 1) / n);

  if (a > -inf || b < inf) {
    const double origin = a > -inf ? a : b;
    const double direction = a > -inf ? 1.0 : -1.0;
    const Tail tail = tail_beyond_cut(origin, direction);
    return finish(adapt(map_tail(origin, direction), unit, options, tail.value), tail, options);
  }

  // Doubly infinite: t in (-t_cut, t_cut), negative half mirrored about 0.
  const Tail up = tail_beyond_cut(0.0, 1.0);
  const Tail down = tail_beyond_cut(0.0, -1.0);
  const Tail tail{up.value + down.value, up.error + down.error};
  auto upper = map_tail(0.0, 1.0);
  auto lower = map_tail(0.0, -1.0);
  auto both = [&](double t) { return t >= 0.0 ? upper(t) : lower(-t); };
  std::vector<std::pair<double, double>> panels;
  for (auto [lo, hi] : unit) {
    panels.emplace_back(lo, hi);
    panels.emplace_back(-hi, -lo);
  }
  return finish(adapt(both, panels, options, tail.value), tail, options);
}

QuadResult integrate_nd(const MultiIntegrand& f, std::span<const Interval> intervals,
                        const QuadOptions& options) {
  if (intervals.empty() || intervals.size() > 3)
    throw Error("integrate_nd supports 1 to 3 dimensions, got " + std::to_string(intervals.size()));
  validate_options(options);

  std::vector<double> point(intervals.size(), 0.0);
  int subdivisions = 0;

  std::function<QuadResult(std::size_t, const QuadOptions&)> level =
      [&](std::size_t dim, const QuadOptions& opts) -> QuadResult {
    QuadOptions inner = opts;
    inner.rel_tol = std::max(opts.rel_tol / 10.0, 1e-13);
    inner.abs_tol = QuadOptions{}.abs_tol;
    auto g = [&, dim](double x) {
      point[dim] = x;
      if (dim + 1 == intervals.size()) return f(point);
      return level(dim + 1, inner).value;
    };
    QuadResult r = integrate_1d(g, intervals[dim], opts);
    subdivisions += r.subdivisions;
    return r;
  };

  QuadResult r = level(0, options);
  r.subdivisions = subdivisions;
  return r;
}

}  // namespace ecotherm
