#include "ecotherm/phase.hpp"

#include <algorithm>
#include <cmath>

#include "ecotherm/catalog.hpp"
#include "ecotherm/error.hpp"

namespace ecotherm {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::c_divergence:
      return "C-divergence";
    case EventKind::s_jump:
      return "S-jump";
    case EventKind::validity_boundary:
      return "validity-boundary";
    case EventKind::gamma_pole_predicted:
      return "gamma-pole-predicted";
  }
  return "unknown";
}

double pareto_critical(double c1) {
  if (!(c1 > 0.0)) throw Error("pareto_critical requires c1 > 0");
  return c1;
}

std::vector<PhaseEvent> detect_events(const PhaseScanReport& report, double c_threshold,
                                      double s_jump_factor, double detection_rel_tol) {
  const auto& grid = report.grid;
  std::vector<PhaseEvent> events;
  const auto valid = static_cast<std::size_t>(
      std::count_if(grid.begin(), grid.end(), [](const ScanPoint& p) { return p.state.has_value(); }));
  if (valid < 3) return events;

  const double slack = 1.0 - detection_rel_tol;

  // Heat-capacity runs.
  for (std::size_t i = 0; i < grid.size();) {
    if (!grid[i].state || !(std::fabs(grid[i].state->C) >= c_threshold * slack)) {
      ++i;
      continue;
    }
    PhaseEvent e{grid[i].T, EventKind::c_divergence, 0.0};
    while (i < grid.size() && grid[i].state && std::fabs(grid[i].state->C) >= c_threshold * slack) {
      e.magnitude = std::max(e.magnitude, std::fabs(grid[i].state->C));
      ++i;
    }
    events.push_back(e);
  }

  // Entropy jumps between adjacent valid points.
  std::vector<double> jumps;
  double s_scale = 1.0;
  for (const auto& p : grid)
    if (p.state) s_scale = std::max(s_scale, std::fabs(p.state->S));
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (grid[i].state && grid[i + 1].state)
      jumps.push_back(std::fabs(grid[i + 1].state->S - grid[i].state->S));
  const double typical = median(jumps);
  const double floor = 1e-6 * s_scale;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const auto& a = grid[i];
    const auto& b = grid[i + 1];
    if (!a.state || !b.state) continue;
    const double ds = std::fabs(b.state->S - a.state->S);
    const double predicted = std::fabs(b.T - a.T) * 0.5 *
                             (std::fabs(a.state->C) / a.T + std::fabs(b.state->C) / b.T);
    const double reference = std::max(typical, predicted);
    if (ds > floor && ds >= s_jump_factor * reference * slack)
      events.push_back({0.5 * (a.T + b.T), EventKind::s_jump, ds});
  }

  // Transitions between valid, overridden and failed points.
  auto status = [](const ScanPoint& p) { return !p.state ? 0 : (p.marked ? 2 : 1); };
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (status(grid[i]) != status(grid[i + 1]))
      events.push_back({0.5 * (grid[i].T + grid[i + 1].T), EventKind::validity_boundary,
                        0.5 * std::fabs(grid[i + 1].T - grid[i].T)});
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const PhaseEvent& x, const PhaseEvent& y) { return x.T_loc < y.T_loc; });
  return events;
}

PhaseScanReport scan_temperature(const ModelSpec& spec, double T_min, double T_max, int steps,
                                 const ScanOptions& options) {
  if (!(T_min > 0.0)) throw Error("scan requires T_min > 0");
  if (!(T_min < T_max)) throw Error("scan requires T_min < T_max");
  if (steps < 2) throw Error("scan requires at least 2 steps");
  validate_model(spec);

  const bool gamma = spec.family == Family::gamma;
  PhaseScanReport report;
  report.grid.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double T = i + 1 == steps ? T_max : T_min + (T_max - T_min) * i / (steps - 1);
    ScanPoint point;
    point.T = T;
    try {
      point.state = thermo_state(spec, T, options.thermo);
    } catch (const Error& e) {
      point.failure = e.what();
      if (gamma && options.gamma_continuation) {
        try {
          ValidityOptions relaxed = options.thermo.numeric.validity;
          relaxed.near_critical = true;
          point.state = closed_form(family_params(spec), T, relaxed);
          point.marked = true;
          point.failure.clear();
        } catch (const Error& inner) {
          point.failure = inner.what();
        }
      }
    }
    report.grid.push_back(std::move(point));
  }

  report.events = detect_events(report, options.c_threshold, options.s_jump_factor,
                                options.detection_rel_tol);

  if (gamma) {
    const FamilyParams p = family_params(spec);
    if (p.d1 > 0.0 && p.delta > 0.0) {
      const int k_max = static_cast<int>(std::floor((p.d1 / T_min - 1.0) / p.delta));
      if (k_max >= 0) {
        const std::vector<double> poles = gamma_poles(p.d1, p.delta, k_max);
        for (std::size_t k = 0; k < poles.size(); ++k)
          if (poles[k] >= T_min && poles[k] <= T_max)
            report.events.push_back(
                {poles[k], EventKind::gamma_pole_predicted, static_cast<double>(k)});
      }
    }
    std::stable_sort(report.events.begin(), report.events.end(),
                     [](const PhaseEvent& x, const PhaseEvent& y) { return x.T_loc < y.T_loc; });
  }
  return report;
}

}  // namespace ecotherm
