#include "ecotherm/catalog.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "ecotherm/error.hpp"

namespace ecotherm {

namespace {

struct LogGamma {
  double value;  // ln|Gamma(z)|
  int sign;
};

LogGamma signed_log_gamma(double z) {
  if (z > 0.0) return {std::lgamma(z), 1};
  int sign = 1;
  const double v = boost::math::lgamma(z, &sign);
  return {v, sign};
}

void finish(ThermoState& s, double log_q) {
  s.Q = std::exp(log_q);
  s.residuals["legendre"] = s.f - (s.mean_m - s.T * s.S);
}

}  // namespace

double log_gamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw Error("log_gamma requires a finite z > 0");
  return std::lgamma(z);
}

double pareto_alpha(double c1, double T) { return c1 / T - 1.0; }

std::vector<double> gamma_poles(double d1, double delta, int k_max) {
  if (!(delta > 0.0)) throw Error("gamma_poles requires delta > 0");
  std::vector<double> poles;
  if (!(d1 > 0.0)) return poles;
  for (int k = 0; k <= k_max; ++k) poles.push_back(d1 / (1.0 + k * delta));
  return poles;
}

double gamma_partition(const FamilyParams& p, double T) {
  if (!(T > 0.0)) throw ValidityError("T > 0", "gamma_partition at non-positive T");
  if (!(p.delta > 0.0)) throw ValidityError("delta > 0", "gamma_partition");
  const double z = (1.0 - p.d1 / T) / p.delta;
  if (z <= 0.0 && std::fabs(z - std::nearbyint(z)) <= 1e-12 * std::max(1.0, std::fabs(z)))
    throw ValidityError("(1 - d1/T)/delta not in {0, -1, -2, ...}", "Gamma pole at argument " +
                                                                        std::to_string(z));
  const LogGamma lg = signed_log_gamma(z);
  const double log_abs =
      std::log(p.measure_factor) - std::log(p.delta) + z * std::log(T / p.c1) + lg.value;
  return lg.sign * std::exp(log_abs);
}

ThermoState closed_form(const FamilyParams& p, double T, const ValidityOptions& validity) {
  check_validity(make_model(p), T, validity);

  ThermoState s;
  s.T = T;
  const double log_factor = std::log(p.measure_factor);

  switch (p.family) {
    case Family::constant: {
      double big_lambda = log_factor;
      for (double l : p.lambdas) big_lambda += std::log(l);
      s.f = p.c0 - T * big_lambda;
      s.S = big_lambda;
      s.mean_m = p.c0;
      for (double l : p.lambdas) s.y.push_back(T / l);
      s.C = 0.0;
      finish(s, big_lambda - p.c0 / T);
      break;
    }
    case Family::single_linear: {
      const double l = log_factor + std::log(T / p.c1);
      s.f = -T * l;
      s.S = 1.0 + l;
      s.mean_m = T;
      s.C = 1.0;
      finish(s, l);
      break;
    }
    case Family::general_linear: {
      const double n = static_cast<double>(p.coefficients.size());
      const double l = log_factor + n * std::log(T) - std::log(p.c_bar());
      s.f = p.c0 - T * l;
      s.S = n + l;
      s.mean_m = p.c0 + n * T;
      s.C = n;
      finish(s, l - p.c0 / T);
      break;
    }
    case Family::quadratic: {
      const double l = log_factor + 0.5 * std::log(std::numbers::pi * T / p.c1);
      s.f = -T * l;
      s.S = 0.5 + l;
      s.mean_m = 0.5 * T;
      s.C = 0.5;
      finish(s, l);
      break;
    }
    case Family::monomial: {
      const double inv = 1.0 / p.delta;
      const double l =
          log_factor - std::log(p.delta) + inv * std::log(T / p.c1) + log_gamma(inv);
      s.f = -T * l;
      s.S = inv + l;
      s.mean_m = T * inv;
      s.C = inv;
      finish(s, l);
      break;
    }
    case Family::pareto: {
      const double alpha = pareto_alpha(p.c1, T);
      const double gap = p.c1 - T;
      const double l = log_factor - std::log(alpha) - alpha * std::log(p.x);
      s.f = -T * l;
      s.S = p.c1 / gap + std::log(p.x * T / gap) + log_factor;
      s.mean_m = p.c1 * T / gap + p.c1 * std::log(p.x);
      s.y = {-gap / p.x};
      s.C = (p.c1 / gap) * (p.c1 / gap);
      finish(s, l);
      break;
    }
    case Family::gamma: {
      const double z = (1.0 - p.d1 / T) / p.delta;
      const double dz = p.d1 / (p.delta * T * T);
      const double d2z = -2.0 * p.d1 / (p.delta * T * T * T);
      const double log_ratio = std::log(T / p.c1);
      const LogGamma lg = signed_log_gamma(z);
      const double psi = boost::math::digamma(z);
      const double psi1 = boost::math::trigamma(z);

      const double l = log_factor - std::log(p.delta) + z * log_ratio + lg.value;
      const double d1l = dz * log_ratio + z / T + dz * psi;
      const double d2l =
          d2z * log_ratio + 2.0 * dz / T - z / (T * T) + d2z * psi + dz * dz * psi1;

      s.f = -T * l;
      s.S = l + T * d1l;
      s.mean_m = T * T * d1l;
      s.C = T * (2.0 * d1l + T * d2l);
      finish(s, l);
      if (z <= 0.0) {
        s.residuals["analytic_continuation"] = 1.0;
        s.residuals["q_sign"] = lg.sign;
      }
      break;
    }
  }
  return s;
}

}  // namespace ecotherm
