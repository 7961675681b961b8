#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ecotherm/model.hpp"

namespace ecotherm::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Closed form against the numeric engine (Q, f, S, <m>, y, C) on a small
// T grid per family; all families when only is empty.
std::vector<CheckResult> family_checks(std::optional<Family> only = std::nullopt);

// The twelve acceptance criteria, in order.
std::vector<CheckResult> acceptance_checks();

// One PASS/FAIL line per check, a summary, and the names of failing checks.
// Returns 0 when every check passed, 2 otherwise.
int print_report(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace ecotherm::cli
