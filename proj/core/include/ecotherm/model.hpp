#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecotherm/expr.hpp"
#include "ecotherm/quadrature.hpp"

namespace ecotherm {

// Closed-form model families.
enum class Family { constant, single_linear, general_linear, quadratic, monomial, pareto, gamma };

inline constexpr Family all_families[] = {Family::constant,  Family::single_linear,
                                          Family::general_linear, Family::quadratic,
                                          Family::monomial, Family::pareto, Family::gamma};

std::string_view to_string(Family family);
std::optional<Family> family_from_string(std::string_view tag);

enum class Bound { lower, upper };

// A macroeconomic parameter realised as one endpoint of a variable's domain
// (the Pareto lower bound x, or Lambda_i as the upper end of [0, Lambda_i]).
struct MacroParam {
  std::string name;
  std::size_t variable;  // 1-based
  Bound bound;
};

struct ModelSpec {
  MoneyExpr money;
  std::vector<Interval> domain;  // one per variable
  ConstantMap constants;
  double measure_factor = 1.0;  // product of spectator Lambda_j
  std::vector<MacroParam> macro_params;
  std::optional<Family> family;

  std::size_t n_vars() const noexcept { return money.n_vars(); }
  double macro_value(std::size_t k) const;
  // Copy with macro parameter k moved to value.
  ModelSpec with_macro(std::size_t k, double value) const;
};

// Parameters of a catalog family. Fields irrelevant to the family are ignored.
struct FamilyParams {
  Family family = Family::single_linear;
  double c0 = 0.0;
  double c1 = 1.0;
  std::vector<double> coefficients;  // general_linear: c1..cn
  double d1 = 0.0;
  double delta = 1.0;
  std::size_t n = 1;            // constant model: number of variables
  double x = 1.0;               // pareto lower bound
  std::vector<double> lambdas;  // constant model: explicit Lambda_i (else all 1)
  double measure_factor = 1.0;

  // Product c1*...*cn for general_linear.
  double c_bar() const;
};

// Money function, domain and constants realising a family.
ModelSpec make_model(const FamilyParams& params);
// Inverse of make_model for specs carrying a family tag.
FamilyParams family_params(const ModelSpec& spec);

// Structural checks; every violation is listed in one Error.
void validate_model(const ModelSpec& spec);

// How close to a validity boundary evaluation may go.
struct ValidityOptions {
  // Lifts the Pareto margin T <= c1*(1 - 1e-3) and admits the analytic
  // continuation of the gamma family below its first pole.
  bool near_critical = false;
  double pareto_margin = 1e-3;
};

// Throws ValidityError naming the violated condition.
void check_validity(const ModelSpec& spec, double T, const ValidityOptions& options = {});

struct NumericOptions {
  QuadOptions quad{};
  bool factorize = true;  // integrate additively separable groups independently
  ValidityOptions validity{};
};

// Q(T) = measure_factor * integral of exp(-m/T) over the domain.
double partition_function(const ModelSpec& spec, double T, const NumericOptions& options = {});
double log_partition(const ModelSpec& spec, double T, const NumericOptions& options = {});

// <g> = (1/Q) integral of g * exp(-m/T); full iterated integral (n_vars <= 3).
using Observable = std::function<double(std::span<const double>)>;
double expectation(const ModelSpec& spec, double T, const Observable& g,
                   const NumericOptions& options = {});

// ln Q, <m> and Var(m) over the separable groups. max_order 0 computes only
// ln Q, 1 adds <m>, 2 adds Var(m).
struct MoneyMoments {
  double log_q = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};
MoneyMoments money_moments(const ModelSpec& spec, double T, const NumericOptions& options = {},
                           int max_order = 2);

}  // namespace ecotherm
