#include "ecotherm/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ecotherm/error.hpp"

namespace ecotherm {

namespace {

double step_for(double x, const ThermoOptions& o) { return std::max(o.rel_step * std::fabs(x), o.min_step); }

// Distance from T to the nearest temperature where the family's closed form
// is singular: T = c1 for pareto, the Gamma poles for gamma.
double singular_distance(const ModelSpec& spec, double T) {
  if (!spec.family) return inf;
  const auto constant = [&](const char* name) {
    const auto it = spec.constants.find(name);
    return it == spec.constants.end() ? std::nan("") : it->second;
  };
  if (*spec.family == Family::pareto) return std::fabs(constant("c1") - T);
  if (*spec.family == Family::gamma) {
    const double d1 = constant("d1"), delta = constant("delta");
    if (!(d1 > 0.0) || !(delta > 0.0)) return inf;
    const double z = (1.0 - d1 / T) / delta;
    double best = inf;
    for (double n : {std::floor(z), std::ceil(z)})
      if (n <= 0.0) best = std::min(best, std::fabs(T - d1 / (1.0 - n * delta)));
    return best;
  }
  return inf;
}

// Temperature step, kept well inside the distance to a singularity.
double t_step(const ModelSpec& spec, double T, const ThermoOptions& o) {
  return std::max(std::min(o.rel_step * T, 0.02 * singular_distance(spec, T)), o.min_step);
}

// Stencil points may sit inside the near-critical band but not past the hard
// validity boundary.
ThermoOptions stencil(const ThermoOptions& o) {
  ThermoOptions s = o;
  s.numeric.validity.near_critical = true;
  return s;
}

double richardson(const std::function<double(double)>& F, double x, double h) {
  auto eval = [&](double at) {
    try {
      return F(at);
    } catch (const DivergenceError& e) {
      throw ValidityError("differentiation stencil inside the validity region",
                          std::string("stencil point diverges: ") + e.what());
    } catch (const ValidityError& e) {
      throw ValidityError("differentiation stencil inside the validity region",
                          "stencil point " + std::to_string(at) + " violates " + e.condition());
    }
  };
  const double wide = (eval(x + h) - eval(x - h)) / (2.0 * h);
  const double narrow = (eval(x + 0.5 * h) - eval(x - 0.5 * h)) / h;
  return (4.0 * narrow - wide) / 3.0;
}

double direct_entropy(const ModelSpec& spec, double T, const NumericOptions& numeric) {
  const MoneyMoments m = money_moments(spec, T, numeric, 1);
  return m.log_q + m.mean / T;
}

double derivative_entropy(const ModelSpec& spec, double T, const ThermoOptions& o) {
  const ThermoOptions s = stencil(o);
  // S = -d(-T ln Q)/dT
  return richardson([&](double t) { return t * log_partition(spec, t, s.numeric); }, T,
                    t_step(spec, T, o));
}

std::vector<double> intensive_at(const ModelSpec& spec, double T, const ThermoOptions& o) {
  const ThermoOptions s = stencil(o);
  std::vector<double> y;
  for (std::size_t k = 0; k < spec.macro_params.size(); ++k) {
    const double x = spec.macro_value(k);
    // y = -df/dx = T d(ln Q)/dx
    const double dlnq = richardson(
        [&](double v) { return log_partition(spec.with_macro(k, v), T, s.numeric); }, x,
        step_for(x, o));
    y.push_back(T * dlnq);
  }
  return y;
}

}  // namespace

double free_money(const ModelSpec& spec, double T, const ThermoOptions& options) {
  return -T * log_partition(spec, T, options.numeric);
}

double entropy(const ModelSpec& spec, double T, EntropyMethod method, const ThermoOptions& options) {
  check_validity(spec, T, options.numeric.validity);
  if (method == EntropyMethod::direct) return direct_entropy(spec, T, options.numeric);
  return derivative_entropy(spec, T, options);
}

std::vector<double> intensive_vars(const ModelSpec& spec, double T, const ThermoOptions& options) {
  validate_model(spec);
  check_validity(spec, T, options.numeric.validity);
  return intensive_at(spec, T, options);
}

double mean_money(const ModelSpec& spec, double T, const ThermoOptions& options,
                  double* cross_check) {
  const MoneyMoments m = money_moments(spec, T, options.numeric, 1);
  if (cross_check != nullptr) {
    const double f = -T * m.log_q;
    *cross_check = m.mean - (f + T * derivative_entropy(spec, T, options));
  }
  return m.mean;
}

double heat_capacity(const ModelSpec& spec, double T, const ThermoOptions& options) {
  check_validity(spec, T, options.numeric.validity);
  const ThermoOptions s = stencil(options);
  return T * richardson([&](double t) { return direct_entropy(spec, t, s.numeric); }, T,
                        t_step(spec, T, options));
}

double first_law_residual(const ModelSpec& spec, double T, double dT, std::span<const double> dx,
                          const ThermoOptions& options) {
  validate_model(spec);
  check_validity(spec, T, options.numeric.validity);
  if (!dx.empty() && dx.size() != spec.macro_params.size())
    throw Error("first_law_residual: dx has " + std::to_string(dx.size()) +
                " entries, model declares " + std::to_string(spec.macro_params.size()) +
                " macro parameters");

  auto shifted = [&](double fraction) {
    ModelSpec moved = spec;
    for (std::size_t k = 0; k < dx.size(); ++k)
      moved = moved.with_macro(k, spec.macro_value(k) + fraction * dx[k]);
    return moved;
  };
  const ThermoOptions s = stencil(options);
  const ModelSpec a = spec;
  const ModelSpec b = shifted(1.0);
  const ModelSpec mid = shifted(0.5);
  const double t_mid = T + 0.5 * dT;

  const MoneyMoments ma = money_moments(a, T, s.numeric, 1);
  const MoneyMoments mb = money_moments(b, T + dT, s.numeric, 1);
  const double d_mean = mb.mean - ma.mean;
  const double d_s = (mb.log_q + mb.mean / (T + dT)) - (ma.log_q + ma.mean / T);

  double work = 0.0;
  if (!dx.empty()) {
    const std::vector<double> y = intensive_at(mid, t_mid, options);
    for (std::size_t k = 0; k < dx.size(); ++k) work += y[k] * dx[k];
  }
  return std::fabs(d_mean - t_mid * d_s + work);
}

ThermoState thermo_state(const ModelSpec& spec, double T, const ThermoOptions& options) {
  validate_model(spec);
  check_validity(spec, T, options.numeric.validity);
  const ThermoOptions s = stencil(options);

  const MoneyMoments m = money_moments(spec, T, options.numeric, 2);
  ThermoState st;
  st.T = T;
  st.Q = std::exp(m.log_q);
  st.f = -T * m.log_q;
  st.mean_m = m.mean;
  const double s_direct = m.log_q + m.mean / T;
  st.S = derivative_entropy(spec, T, options);
  st.C = T * richardson([&](double t) { return direct_entropy(spec, t, s.numeric); }, T,
                        t_step(spec, T, options));
  st.y = intensive_at(spec, T, options);

  st.residuals["legendre"] = st.f - (st.mean_m - T * st.S);
  st.residuals["entropy_routes"] = st.S - s_direct;
  st.residuals["mean_money_routes"] = st.mean_m - (st.f + T * st.S);
  st.residuals["heat_capacity_fluct"] = st.C - m.variance / (T * T);
  return st;
}

}  // namespace ecotherm
