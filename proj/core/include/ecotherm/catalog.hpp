#pragma once

#include <vector>

#include "ecotherm/model.hpp"
#include "ecotherm/state.hpp"

namespace ecotherm {

// Closed-form thermodynamics of a catalog family at temperature T. Throws
// ValidityError when a family condition fails (T >= c1 for pareto, a Gamma
// pole, delta <= 0, ...). With validity.near_critical the pareto margin is
// lifted and the gamma family is continued analytically below its first
// pole; such states carry residuals["analytic_continuation"] = 1 and
// residuals["q_sign"] = sign of the continued Q (Q itself holds |Q|).
ThermoState closed_form(const FamilyParams& params, double T, const ValidityOptions& validity = {});

// Q = measure_factor * (1/delta) * (T/c1)^z * Gamma(z), z = (1 - d1/T)/delta.
// Negative non-pole z is evaluated by reflection (Q may then be negative).
// Throws ValidityError at a pole of Gamma.
double gamma_partition(const FamilyParams& params, double T);

// Temperatures d1/(1 + k*delta), k = 0..k_max, at which the gamma-family
// partition function has a pole. Empty when d1 <= 0.
std::vector<double> gamma_poles(double d1, double delta, int k_max);

// alpha = c1/T - 1; positivity is the caller's concern.
double pareto_alpha(double c1, double T);

// ln Gamma(z) for z > 0.
double log_gamma(double z);

}  // namespace ecotherm
