#include "ecotherm/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "ecotherm/error.hpp"

namespace ecotherm {

namespace {

constexpr std::array<std::string_view, 7> family_tags = {
    "constant", "single_linear", "general_linear", "quadratic", "monomial", "pareto", "gamma"};

std::string fmt(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6g", v);
  return buf.data();
}

double require_constant(const ModelSpec& spec, std::string_view name) {
  auto it = spec.constants.find(name);
  if (it == spec.constants.end())
    throw Error("model is missing constant '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> required_constants(Family family, std::size_t n_vars) {
  switch (family) {
    case Family::constant:
      return {"c0"};
    case Family::single_linear:
    case Family::quadratic:
    case Family::pareto:
      return {"c1"};
    case Family::general_linear: {
      std::vector<std::string> names{"c0"};
      for (std::size_t i = 1; i <= n_vars; ++i) names.push_back("c" + std::to_string(i));
      return names;
    }
    case Family::monomial:
      return {"c1", "delta"};
    case Family::gamma:
      return {"c1", "d1", "delta"};
  }
  return {};
}

struct Group {
  std::vector<std::size_t> variables;  // 1-based
  BoundExpr money;
  double m_ref = 0.0;
};

struct Prepared {
  double constant_money = 0.0;
  std::vector<Group> groups;
  double log_free_volume = 0.0;  // unreferenced variables: sum of ln(length)
};

double reference_coordinate(const Interval& iv) {
  if (iv.finite()) return 0.5 * (iv.lower + iv.upper);
  if (iv.lower > -inf) return iv.lower + 1.0;
  if (iv.upper < inf) return iv.upper - 1.0;
  return 0.0;
}

// Smallest finite money over bounds, zero and the interior reference of vars.
double reference_money(const BoundExpr& money, const ModelSpec& spec,
                       const std::vector<std::size_t>& vars) {
  std::vector<double> point(spec.n_vars());
  for (std::size_t i = 0; i < point.size(); ++i) point[i] = reference_coordinate(spec.domain[i]);
  std::vector<std::vector<double>> candidates;
  for (std::size_t v : vars) {
    const Interval& iv = spec.domain[v - 1];
    std::vector<double> c{point[v - 1]};
    if (iv.lower > -inf) c.push_back(iv.lower);
    if (iv.upper < inf) c.push_back(iv.upper);
    if (iv.lower < 0.0 && iv.upper > 0.0) c.push_back(0.0);
    candidates.push_back(std::move(c));
  }
  double best = inf;
  std::function<void(std::size_t)> visit = [&](std::size_t k) {
    if (k == vars.size()) {
      try {
        const double m = money(point);
        if (std::isfinite(m)) best = std::min(best, m);
      } catch (const EvalError&) {
      }
      return;
    }
    for (double x : candidates[k]) {
      point[vars[k] - 1] = x;
      visit(k + 1);
    }
  };
  visit(0);
  return std::isfinite(best) ? best : 0.0;
}

Prepared prepare(const ModelSpec& spec, bool factorize) {
  Prepared out;
  const std::size_t n = spec.n_vars();
  std::vector<double> ref(n);
  for (std::size_t i = 0; i < n; ++i) ref[i] = reference_coordinate(spec.domain[i]);

  auto add_group = [&](std::vector<std::size_t> vars, const NodePtr& money) {
    if (vars.size() > 3)
      throw Error("non-separable group of " + std::to_string(vars.size()) +
                  " variables; at most 3 are supported");
    Group g{std::move(vars), bind_constants(money, n, spec.constants), 0.0};
    g.m_ref = reference_money(g.money, spec, g.variables);
    out.groups.push_back(std::move(g));
  };

  std::set<std::size_t> covered;
  if (factorize) {
    SeparatedExpr sep = separate(spec.money);
    if (sep.constant_part) out.constant_money = bind_constants(sep.constant_part, n, spec.constants)(ref);
    for (auto& g : sep.groups) {
      covered.insert(g.variables.begin(), g.variables.end());
      add_group(std::move(g.variables), g.money);
    }
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{1});
    covered.insert(all.begin(), all.end());
    add_group(std::move(all), spec.money.root_ptr());
  }

  for (std::size_t v = 1; v <= n; ++v) {
    if (covered.contains(v)) continue;
    const Interval& iv = spec.domain[v - 1];
    if (!iv.finite())
      throw DivergenceError("integral diverges: l" + std::to_string(v) +
                            " does not enter the money function and its domain is infinite");
    out.log_free_volume += std::log(iv.length());
  }
  return out;
}

// Integral of (m - m_ref)^power * exp(-(m - m_ref)/T) over the group's box.
// Moment integrals may vanish (m_ref == <m>), so for power > 0 the tolerance
// gets an absolute part on the scale i0 * T^power.
double group_integral(const ModelSpec& spec, const Group& g, double T, int power,
                      const NumericOptions& options, double i0 = 0.0) {
  const std::size_t n = spec.n_vars();
  std::vector<double> full(n);
  for (std::size_t i = 0; i < n; ++i) full[i] = reference_coordinate(spec.domain[i]);
  std::vector<Interval> box;
  for (std::size_t v : g.variables) box.push_back(spec.domain[v - 1]);

  auto w = [&](std::span<const double> sub) {
    for (std::size_t k = 0; k < sub.size(); ++k) full[g.variables[k] - 1] = sub[k];
    const double dm = g.money(full) - g.m_ref;
    const double e = std::exp(-dm / T);
    if (e < std::numeric_limits<double>::min()) return 0.0;
    switch (power) {
      case 0:
        return e;
      case 1:
        return dm * e;
      default:
        return dm * dm * e;
    }
  };
  QuadOptions quad = options.quad;
  if (power > 0)
    quad.abs_tol = std::max(quad.abs_tol, 1e-2 * quad.rel_tol * i0 * std::pow(T, power));
  return integrate_nd(w, box, quad).value;
}

void check_temperature(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidityError("T > 0", "T = " + fmt(T));
}

}  // namespace

std::string_view to_string(Family family) { return family_tags[static_cast<std::size_t>(family)]; }

std::optional<Family> family_from_string(std::string_view tag) {
  for (std::size_t i = 0; i < family_tags.size(); ++i)
    if (family_tags[i] == tag) return static_cast<Family>(i);
  return std::nullopt;
}

double ModelSpec::macro_value(std::size_t k) const {
  const MacroParam& p = macro_params.at(k);
  const Interval& iv = domain.at(p.variable - 1);
  return p.bound == Bound::lower ? iv.lower : iv.upper;
}

ModelSpec ModelSpec::with_macro(std::size_t k, double value) const {
  ModelSpec copy = *this;
  const MacroParam& p = macro_params.at(k);
  Interval& iv = copy.domain.at(p.variable - 1);
  (p.bound == Bound::lower ? iv.lower : iv.upper) = value;
  return copy;
}

double FamilyParams::c_bar() const {
  return std::accumulate(coefficients.begin(), coefficients.end(), 1.0, std::multiplies<>());
}

ModelSpec make_model(const FamilyParams& p) {
  auto c = [](const char* name) { return make_constant(name); };
  auto var = [](std::size_t i) { return make_variable(i); };

  switch (p.family) {
    case Family::constant: {
      const std::size_t n = p.lambdas.empty() ? std::max<std::size_t>(p.n, 1) : p.lambdas.size();
      ModelSpec spec{MoneyExpr(c("c0"), n), {}, {{"c0", p.c0}}, p.measure_factor, {}, p.family};
      for (std::size_t i = 0; i < n; ++i) {
        spec.domain.push_back({0.0, p.lambdas.empty() ? 1.0 : p.lambdas[i]});
        if (!p.lambdas.empty())
          spec.macro_params.push_back({"Lambda" + std::to_string(i + 1), i + 1, Bound::upper});
      }
      return spec;
    }
    case Family::single_linear:
      return {MoneyExpr(make_mul(c("c1"), var(1)), 1),
              {{0.0, inf}},
              {{"c1", p.c1}},
              p.measure_factor,
              {},
              p.family};
    case Family::general_linear: {
      if (p.coefficients.empty()) throw Error("general_linear needs at least one coefficient");
      NodePtr m = c("c0");
      ConstantMap constants{{"c0", p.c0}};
      std::vector<Interval> domain;
      for (std::size_t i = 1; i <= p.coefficients.size(); ++i) {
        const std::string name = "c" + std::to_string(i);
        m = make_add(m, make_mul(make_constant(name), var(i)));
        constants[name] = p.coefficients[i - 1];
        domain.push_back({0.0, inf});
      }
      return {MoneyExpr(m, p.coefficients.size()), domain, constants, p.measure_factor, {},
              p.family};
    }
    case Family::quadratic:
      return {MoneyExpr(make_mul(c("c1"), make_pow(var(1), make_number(2.0))), 1),
              {{-inf, inf}},
              {{"c1", p.c1}},
              p.measure_factor,
              {},
              p.family};
    case Family::monomial:
      return {MoneyExpr(make_mul(c("c1"), make_pow(var(1), c("delta"))), 1),
              {{0.0, inf}},
              {{"c1", p.c1}, {"delta", p.delta}},
              p.measure_factor,
              {},
              p.family};
    case Family::pareto:
      return {MoneyExpr(make_mul(c("c1"), make_ln(var(1))), 1),
              {{p.x, inf}},
              {{"c1", p.c1}},
              p.measure_factor,
              {{"x", 1, Bound::lower}},
              p.family};
    case Family::gamma:
      return {MoneyExpr(make_add(make_mul(c("c1"), make_pow(var(1), c("delta"))),
                                 make_mul(c("d1"), make_ln(var(1)))),
                        1),
              {{0.0, inf}},
              {{"c1", p.c1}, {"d1", p.d1}, {"delta", p.delta}},
              p.measure_factor,
              {},
              p.family};
  }
  throw Error("unknown family");
}

FamilyParams family_params(const ModelSpec& spec) {
  if (!spec.family) throw Error("model has no family tag; closed forms need one");
  FamilyParams p;
  p.family = *spec.family;
  p.measure_factor = spec.measure_factor;
  auto get = [&](const char* name) { return require_constant(spec, name); };
  switch (p.family) {
    case Family::constant: {
      p.c0 = get("c0");
      p.n = spec.n_vars();
      if (!spec.macro_params.empty()) {
        for (const auto& iv : spec.domain) p.lambdas.push_back(iv.length());
      } else {
        for (const auto& iv : spec.domain) p.measure_factor *= iv.length();
      }
      break;
    }
    case Family::single_linear:
    case Family::quadratic:
      p.c1 = get("c1");
      break;
    case Family::general_linear:
      p.c0 = get("c0");
      p.n = spec.n_vars();
      for (std::size_t i = 1; i <= spec.n_vars(); ++i)
        p.coefficients.push_back(get(("c" + std::to_string(i)).c_str()));
      p.c1 = p.coefficients.front();
      break;
    case Family::monomial:
      p.c1 = get("c1");
      p.delta = get("delta");
      break;
    case Family::pareto:
      p.c1 = get("c1");
      p.x = spec.domain.at(0).lower;
      break;
    case Family::gamma:
      p.c1 = get("c1");
      p.d1 = get("d1");
      p.delta = get("delta");
      break;
  }
  return p;
}

void validate_model(const ModelSpec& spec) {
  std::vector<std::string> problems;
  const std::size_t n = spec.n_vars();

  if (spec.domain.size() != n)
    problems.push_back("domain has " + std::to_string(spec.domain.size()) + " intervals, expected " +
                       std::to_string(n));
  for (std::size_t i = 0; i < spec.domain.size(); ++i) {
    const Interval& iv = spec.domain[i];
    if (std::isnan(iv.lower) || std::isnan(iv.upper) || !(iv.lower < iv.upper))
      problems.push_back("domain of l" + std::to_string(i + 1) + " requires lower < upper");
  }
  if (!(spec.measure_factor > 0.0) || !std::isfinite(spec.measure_factor))
    problems.push_back("measure_factor must be a positive finite number");

  for (const auto& name : referenced_constants(spec.money)) {
    auto it = spec.constants.find(name);
    if (it == spec.constants.end())
      problems.push_back("constant '" + name + "' is used but not defined");
    else if (!std::isfinite(it->second))
      problems.push_back("constant '" + name + "' is not finite");
  }

  for (const auto& p : spec.macro_params) {
    if (p.variable < 1 || p.variable > n || p.variable > spec.domain.size()) {
      problems.push_back("macro parameter '" + p.name + "' refers to a missing variable");
      continue;
    }
    const Interval& iv = spec.domain[p.variable - 1];
    const double v = p.bound == Bound::lower ? iv.lower : iv.upper;
    if (!std::isfinite(v))
      problems.push_back("macro parameter '" + p.name + "' sits on an infinite bound");
  }

  if (spec.family) {
    const Family f = *spec.family;
    for (const auto& name : required_constants(f, n))
      if (!spec.constants.contains(name))
        problems.push_back(std::string(to_string(f)) + " requires constant '" + name + "'");

    auto positive = [&](const char* name) {
      auto it = spec.constants.find(name);
      if (it != spec.constants.end() && !(it->second > 0.0))
        problems.push_back(std::string(name) + " must be positive");
    };
    auto expect_domain = [&](double lo, double hi, const char* text) {
      if (spec.domain.size() == n)
        for (const auto& iv : spec.domain)
          if (iv.lower != lo || iv.upper != hi)
            problems.push_back(std::string(to_string(f)) + " integrates over " + text);
    };
    switch (f) {
      case Family::constant:
        for (const auto& iv : spec.domain)
          if (!iv.finite()) problems.push_back("constant model needs finite domains (Lambda_i)");
        break;
      case Family::single_linear:
        positive("c1");
        expect_domain(0.0, inf, "[0, inf)");
        break;
      case Family::general_linear:
        for (std::size_t i = 1; i <= n; ++i) positive(("c" + std::to_string(i)).c_str());
        expect_domain(0.0, inf, "[0, inf)");
        break;
      case Family::quadratic:
        positive("c1");
        expect_domain(-inf, inf, "(-inf, inf)");
        break;
      case Family::monomial:
      case Family::gamma:
        positive("c1");
        expect_domain(0.0, inf, "[0, inf)");
        break;
      case Family::pareto:
        positive("c1");
        if (n != 1) problems.push_back("pareto family has exactly one variable");
        if (!spec.domain.empty() &&
            !(spec.domain[0].lower > 0.0 && std::isfinite(spec.domain[0].lower) &&
              spec.domain[0].upper == inf))
          problems.push_back("pareto requires domain [x, inf) with finite x > 0");
        break;
    }
  }

  if (problems.empty()) return;
  std::string message = "invalid model:";
  for (const auto& p : problems) message += "\n  - " + p;
  throw Error(message);
}

void check_validity(const ModelSpec& spec, double T, const ValidityOptions& options) {
  check_temperature(T);
  if (!spec.family) return;
  switch (*spec.family) {
    case Family::monomial: {
      const double delta = require_constant(spec, "delta");
      if (!(delta > 0.0)) throw ValidityError("delta > 0", "delta = " + fmt(delta));
      break;
    }
    case Family::pareto: {
      const double c1 = require_constant(spec, "c1");
      const double x = spec.domain.at(0).lower;
      if (!(x > 0.0)) throw ValidityError("x > 0", "x = " + fmt(x));
      const double alpha = c1 / T - 1.0;
      if (!(alpha > 0.0))
        throw ValidityError("alpha = c1/T - 1 > 0",
                            "alpha = " + fmt(alpha) + " at T = " + fmt(T) + ", c1 = " + fmt(c1));
      if (!options.near_critical && T > c1 * (1.0 - options.pareto_margin))
        throw ValidityError("T <= c1*(1 - " + fmt(options.pareto_margin) + ")",
                            "T = " + fmt(T) + " is within the near-critical band of c1 = " +
                                fmt(c1) + "; pass the near-critical override to evaluate");
      break;
    }
    case Family::gamma: {
      const double delta = require_constant(spec, "delta");
      const double d1 = require_constant(spec, "d1");
      if (!(delta > 0.0)) throw ValidityError("delta > 0", "delta = " + fmt(delta));
      const double z = (1.0 - d1 / T) / delta;
      if (z <= 0.0 && std::fabs(z - std::nearbyint(z)) <= 1e-12 * std::max(1.0, std::fabs(z)))
        throw ValidityError("(1 - d1/T)/delta not in {0, -1, -2, ...}",
                            "Gamma pole at argument " + fmt(z) + " (T = " + fmt(T) + ")");
      if (z <= 0.0 && !options.near_critical)
        throw ValidityError("(1 - d1/T)/delta > 0",
                            "argument " + fmt(z) + " at T = " + fmt(T) +
                                "; the integral diverges at l1 -> 0");
      break;
    }
    default:
      break;
  }
}

double log_partition(const ModelSpec& spec, double T, const NumericOptions& options) {
  return money_moments(spec, T, options, 0).log_q;
}

double partition_function(const ModelSpec& spec, double T, const NumericOptions& options) {
  const double q = std::exp(log_partition(spec, T, options));
  if (!(q > 0.0) || !std::isfinite(q))
    throw Error("partition function is not representable as a double (ln Q = " +
                fmt(log_partition(spec, T, options)) + ")");
  return q;
}

MoneyMoments money_moments(const ModelSpec& spec, double T, const NumericOptions& options,
                           int max_order) {
  validate_model(spec);
  check_validity(spec, T, options.validity);
  const Prepared prep = prepare(spec, options.factorize);

  MoneyMoments out;
  out.log_q = std::log(spec.measure_factor) + prep.log_free_volume - prep.constant_money / T;
  out.mean = prep.constant_money;
  for (const Group& g : prep.groups) {
    const double i0 = group_integral(spec, g, T, 0, options);
    if (!(i0 > 0.0)) throw Error("partition integral vanished (underflow)");
    out.log_q += std::log(i0) - g.m_ref / T;
    if (max_order < 1) continue;
    const double mean_shift = group_integral(spec, g, T, 1, options, i0) / i0;
    out.mean += g.m_ref + mean_shift;
    if (max_order < 2) continue;
    out.variance += group_integral(spec, g, T, 2, options, i0) / i0 - mean_shift * mean_shift;
  }
  return out;
}

double expectation(const ModelSpec& spec, double T, const Observable& g,
                   const NumericOptions& options) {
  validate_model(spec);
  check_validity(spec, T, options.validity);
  const std::size_t n = spec.n_vars();
  if (n > 3) throw Error("expectation supports at most 3 variables");

  const BoundExpr money = bind_constants(spec.money, spec.constants);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{1});
  const double m_ref = reference_money(money, spec, all);

  auto weight = [&](std::span<const double> p) {
    const double e = std::exp(-(money(p) - m_ref) / T);
    return e < std::numeric_limits<double>::min() ? 0.0 : e;
  };
  const double z = integrate_nd(weight, spec.domain, options.quad).value;
  if (!(z > 0.0)) throw Error("partition integral vanished (underflow)");
  const double num = integrate_nd(
      [&](std::span<const double> p) {
        const double w = weight(p);
        return w == 0.0 ? 0.0 : g(p) * w;
      },
      spec.domain, options.quad).value;
  return num / z;
}

}  // namespace ecotherm
