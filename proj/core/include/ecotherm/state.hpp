#pragma once

#include <map>
#include <string>
#include <vector>

namespace ecotherm {

// Thermodynamic variables at one temperature.
//
// y holds the intensive variables conjugate to the model's declared macro
// parameters, in declaration order; integrated-out variables contribute none
// (their y is 0 by convention). residuals carries named consistency checks.
struct ThermoState {
  double T = 0.0;
  double Q = 0.0;
  double f = 0.0;
  double S = 0.0;
  double mean_m = 0.0;
  std::vector<double> y;
  double C = 0.0;
  std::map<std::string, double> residuals;
};

}  // namespace ecotherm
