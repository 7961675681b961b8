#pragma once

#include <span>
#include <vector>

#include "ecotherm/model.hpp"
#include "ecotherm/state.hpp"

namespace ecotherm {

// Numerical thermodynamics of any model (catalog or parsed).
//
// Derivatives are central differences with step h = max(rel_step * |x|,
// min_step), refined by one Richardson level: (4 D(h/2) - D(h)) / 3. In T
// the step is also capped at 2% of the distance to the Pareto critical point
// or the nearest Gamma pole.
// The evaluation point must satisfy the model's validity conditions under
// numeric.validity; stencil points only need the hard conditions (for pareto
// alpha > 0), so a point just inside the near-critical margin still works.
struct ThermoOptions {
  NumericOptions numeric{};
  double rel_step = 1e-4;
  double min_step = 1e-7;
};

enum class EntropyMethod {
  derivative,  // S = -df/dT
  direct,      // S = <-ln rho> = ln Q + <m>/T
};

double free_money(const ModelSpec& spec, double T, const ThermoOptions& options = {});

double entropy(const ModelSpec& spec, double T, EntropyMethod method,
               const ThermoOptions& options = {});

// y_k = -df/dx_k for each declared macro parameter, in declaration order.
std::vector<double> intensive_vars(const ModelSpec& spec, double T,
                                   const ThermoOptions& options = {});

// <m> by quadrature. When cross_check is non-null it receives
// <m> - (f + T*S) with S from the derivative route.
double mean_money(const ModelSpec& spec, double T, const ThermoOptions& options = {},
                  double* cross_check = nullptr);

// C = T dS/dT, differentiating the direct entropy.
double heat_capacity(const ModelSpec& spec, double T, const ThermoOptions& options = {});

// |d<m> - T dS + sum_k y_k dx_k| between (T, x) and (T + dT, x + dx), with T
// and y taken at the midpoint. dx has one entry per macro parameter (may be
// empty when there are none or none move).
double first_law_residual(const ModelSpec& spec, double T, double dT, std::span<const double> dx,
                          const ThermoOptions& options = {});

// Full state. S comes from the derivative route; residuals hold
//   legendre              f - (<m> - T S)
//   entropy_routes        S(derivative) - S(direct)
//   mean_money_routes     <m> - (f + T S)
//   heat_capacity_fluct   C - Var(m)/T^2
ThermoState thermo_state(const ModelSpec& spec, double T, const ThermoOptions& options = {});

}  // namespace ecotherm
