#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecotherm/model.hpp"
#include "ecotherm/state.hpp"
#include "ecotherm/thermo.hpp"

namespace ecotherm {

enum class EventKind { c_divergence, s_jump, validity_boundary, gamma_pole_predicted };

std::string_view to_string(EventKind kind);

// One flagged location. Labels are candidates, not classifications.
//   c_divergence          T_loc = first grid T of a run with |C| >= threshold,
//                         magnitude = max |C| over the run
//   s_jump                T_loc = midpoint of the pair, magnitude = |dS|
//   validity_boundary     T_loc = midpoint between a valid and an invalid
//                         point, magnitude = half the bracket width
//   gamma_pole_predicted  T_loc = d1/(1 + k delta), magnitude = k
struct PhaseEvent {
  double T_loc = 0.0;
  EventKind kind = EventKind::c_divergence;
  double magnitude = 0.0;
};

struct ScanPoint {
  double T = 0.0;
  std::optional<ThermoState> state;  // empty when the point failed
  std::string failure;               // why, when state is empty
  bool marked = false;               // computed under a validity override
};

struct PhaseScanReport {
  std::vector<ScanPoint> grid;
  std::vector<PhaseEvent> events;  // sorted by T_loc
};

struct ScanOptions {
  ThermoOptions thermo{};
  double c_threshold = 100.0;
  double s_jump_factor = 10.0;
  // Thresholds are compared with this relative slack so that a point sitting
  // exactly on the threshold is not lost to quadrature rounding.
  double detection_rel_tol = 1e-6;
  // Gamma family: evaluate states on the far side of the first pole by
  // analytic continuation (marked), instead of recording failures.
  bool gamma_continuation = true;
};

// Evaluates a ThermoState at `steps` equally spaced temperatures in
// [T_min, T_max] (inclusive). Per-point failures are recorded, never thrown.
// Throws Error only for an invalid grid (T_min <= 0, T_min >= T_max,
// steps < 2).
PhaseScanReport scan_temperature(const ModelSpec& spec, double T_min, double T_max, int steps,
                                 const ScanOptions& options = {});

// C-divergence, S-jump and validity-boundary events of a grid. A pair of
// adjacent valid points is an S-jump when |dS| >= s_jump_factor times the
// larger of the median |dS| of the scan and the change predicted from the
// endpoint heat capacities, |dT| * (C_i/T_i + C_j/T_j)/2. Returns nothing
// for fewer than 3 valid points.
std::vector<PhaseEvent> detect_events(const PhaseScanReport& report, double c_threshold,
                                      double s_jump_factor, double detection_rel_tol = 1e-6);

// Critical temperature of the pareto family: T_c = c1.
double pareto_critical(double c1);

}  // namespace ecotherm
