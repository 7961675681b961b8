#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ecotherm/catalog.hpp"
#include "ecotherm/error.hpp"
#include "ecotherm/phase.hpp"

using namespace ecotherm;

namespace {

ModelSpec pareto(double c1, double x = 1.0) {
  FamilyParams p;
  p.family = Family::pareto;
  p.c1 = c1;
  p.x = x;
  return make_model(p);
}

ModelSpec family(Family f, double c1 = 1.0, double delta = 1.0, double d1 = 0.0) {
  FamilyParams p;
  p.family = f;
  p.c1 = c1;
  p.c0 = 1.0;
  p.delta = delta;
  p.d1 = d1;
  p.n = 2;
  p.coefficients = {1.0, 0.5};
  return make_model(p);
}

std::size_t count(const PhaseScanReport& r, EventKind kind) {
  return static_cast<std::size_t>(
      std::count_if(r.events.begin(), r.events.end(), [&](const PhaseEvent& e) { return e.kind == kind; }));
}

// Least-squares slope of ys against xs.
double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScanPoint synthetic(double T, double S, double C) {
  ThermoState s;
  s.T = T;
  s.S = S;
  s.C = C;
  s.Q = 1.0;
  return {T, s, "", false};
}

}  // namespace

TEST(ScanTemperature, ParetoApproachesDivergence) {
  const PhaseScanReport r = scan_temperature(pareto(2.0), 0.5, 1.9, 50);
  ASSERT_EQ(r.grid.size(), 50u);
  EXPECT_EQ(r.grid.front().T, 0.5);
  EXPECT_EQ(r.grid.back().T, 1.9);
  double prev = 0.0;
  for (const ScanPoint& p : r.grid) {
    ASSERT_TRUE(p.state) << p.T << ": " << p.failure;
    EXPECT_GT(p.state->C, prev);
    prev = p.state->C;
    if (p.T >= 1.8) {
      EXPECT_GE(p.state->C, 100.0 * (1.0 - 1e-6)) << p.T;
    }
    EXPECT_NEAR(p.state->C, std::pow(2.0 / (2.0 - p.T), 2), 1e-4 * p.state->C);
  }
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].kind, EventKind::c_divergence);
  EXPECT_GE(r.events[0].T_loc, 1.8);
  EXPECT_LE(r.events[0].T_loc, 1.9);
  EXPECT_NEAR(r.events[0].magnitude, 400.0, 1e-2);
}

TEST(ScanTemperature, SmoothFamiliesHaveNoEvents) {
  FamilyParams mono;
  mono.family = Family::monomial;
  mono.delta = 2.0;
  const PhaseScanReport r = scan_temperature(make_model(mono), 0.1, 10.0, 60);
  for (const ScanPoint& p : r.grid) {
    ASSERT_TRUE(p.state);
    EXPECT_NEAR(p.state->C, 0.5, 1e-4);
  }
  EXPECT_TRUE(r.events.empty());

  for (Family f : {Family::constant, Family::single_linear, Family::general_linear, Family::quadratic,
                   Family::monomial}) {
    const PhaseScanReport s = scan_temperature(family(f, 1.5, 0.7), 0.05, 20.0, 80);
    EXPECT_TRUE(s.events.empty()) << to_string(f) << " " << s.events.size();
  }
}

TEST(ScanTemperature, GammaPolesArePredicted) {
  const double d1 = 1.0, delta = 1.0, t_min = 0.2, t_max = 2.0;
  const PhaseScanReport r = scan_temperature(family(Family::gamma, 1.0, delta, d1), t_min, t_max, 37);
  std::vector<double> predicted;
  for (const PhaseEvent& e : r.events)
    if (e.kind == EventKind::gamma_pole_predicted) predicted.push_back(e.T_loc);
  std::sort(predicted.begin(), predicted.end());

  std::vector<double> want;
  for (double T : gamma_poles(d1, delta, 100))
    if (T >= t_min && T <= t_max) want.push_back(T);
  std::sort(want.begin(), want.end());
  EXPECT_EQ(predicted, want);
  for (double T : {1.0, 0.5, 1.0 / 3.0, 0.25})
    EXPECT_NE(std::find(predicted.begin(), predicted.end(), T), predicted.end()) << T;

  // Far side of the first pole is continued, not dropped.
  bool saw_marked = false;
  for (const ScanPoint& p : r.grid) {
    if (p.T < d1 && p.state) saw_marked = saw_marked || p.marked;
    if (p.T > d1) {
      ASSERT_TRUE(p.state);
      EXPECT_FALSE(p.marked);
    }
  }
  EXPECT_TRUE(saw_marked);
}

TEST(ScanTemperature, GammaWithoutContinuationRecordsFailures) {
  ScanOptions opts;
  opts.gamma_continuation = false;
  const PhaseScanReport r = scan_temperature(family(Family::gamma, 1.0, 1.0, 1.0), 0.2, 2.0, 37, opts);
  for (const ScanPoint& p : r.grid) {
    if (p.T < 1.0) {
      EXPECT_FALSE(p.state);
      EXPECT_FALSE(p.failure.empty());
    }
  }
  EXPECT_GE(count(r, EventKind::validity_boundary), 1u);
}

TEST(ScanTemperature, EventsSorted) {
  for (const PhaseScanReport& r :
       {scan_temperature(family(Family::gamma, 1.0, 0.5, 1.5), 0.1, 3.0, 41),
        scan_temperature(pareto(2.0), 0.5, 2.5, 41)}) {
    for (std::size_t i = 1; i < r.events.size(); ++i)
      EXPECT_LE(r.events[i - 1].T_loc, r.events[i].T_loc);
  }
}

TEST(ScanTemperature, ParetoValidityBoundary) {
  const PhaseScanReport r = scan_temperature(pareto(2.0), 0.5, 2.5, 41);
  std::size_t failed = 0;
  for (const ScanPoint& p : r.grid) {
    if (p.T > 2.0 * (1.0 - 1e-3)) {
      EXPECT_FALSE(p.state) << p.T;
      ++failed;
    } else {
      EXPECT_TRUE(p.state) << p.T;
    }
  }
  EXPECT_GT(failed, 0u);
  ASSERT_EQ(count(r, EventKind::validity_boundary), 1u);
  for (const PhaseEvent& e : r.events)
    if (e.kind == EventKind::validity_boundary) {
      EXPECT_LE(std::fabs(e.T_loc - 2.0), e.magnitude + 1e-12);
    }
  EXPECT_EQ(count(r, EventKind::c_divergence), 1u);
}

TEST(ScanTemperature, ArgumentErrors) {
  const ModelSpec spec = pareto(2.0);
  EXPECT_THROW(scan_temperature(spec, 0.0, 1.0, 10), Error);
  EXPECT_THROW(scan_temperature(spec, 1.0, 1.0, 10), Error);
  EXPECT_THROW(scan_temperature(spec, 1.5, 1.0, 10), Error);
  EXPECT_THROW(scan_temperature(spec, 0.5, 1.0, 1), Error);
}

TEST(PhaseProperty, ParetoExponentIsTwo) {
  for (double c1 : {0.5, 1.0, 2.0, 5.0}) {
    const PhaseScanReport r = scan_temperature(pareto(c1, 1.7), 0.5 * c1, 0.95 * c1, 30);
    std::vector<double> xs, ys;
    for (const ScanPoint& p : r.grid) {
      ASSERT_TRUE(p.state);
      xs.push_back(-std::log(c1 - p.T));
      ys.push_back(std::log(p.state->C));
    }
    EXPECT_NEAR(slope(xs, ys), 2.0, 0.05) << c1;
  }
}

TEST(DetectEvents, NeedsThreeValidPoints) {
  PhaseScanReport r;
  r.grid = {synthetic(1.0, 0.0, 1e6), synthetic(2.0, 10.0, 1e6)};
  r.grid.push_back({3.0, std::nullopt, "invalid", false});
  EXPECT_TRUE(detect_events(r, 100.0, 10.0).empty());
}

TEST(DetectEvents, EntropyJump) {
  PhaseScanReport r;
  for (int i = 0; i < 20; ++i) {
    const double T = 1.0 + 0.1 * i;
    r.grid.push_back(synthetic(T, 0.01 * i + (i >= 12 ? 5.0 : 0.0), 0.01));
  }
  const auto events = detect_events(r, 100.0, 10.0);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, EventKind::s_jump);
  EXPECT_NEAR(events[0].T_loc, 2.15, 1e-12);
  EXPECT_NEAR(events[0].magnitude, 5.01, 1e-12);
}

TEST(DetectEvents, SteepButSmoothEntropyIsNotAJump) {
  // dS/dT = C/T, so a large jump in S is expected where C is large.
  PhaseScanReport r;
  for (int i = 0; i < 20; ++i) {
    const double T = 1.0 + 0.1 * i;
    const double C = i >= 12 ? 50.0 : 0.01;
    r.grid.push_back(synthetic(T, i >= 12 ? 5.0 + (i - 12) * 5.0 / T : 0.001 * i, C));
  }
  for (const PhaseEvent& e : detect_events(r, 100.0, 10.0))
    EXPECT_NE(e.kind, EventKind::s_jump) << e.T_loc;
}

TEST(DetectEvents, ThresholdRuns) {
  PhaseScanReport r;
  const double cs[] = {1, 2, 150, 300, 5, 6, 200, 7};
  for (int i = 0; i < 8; ++i) r.grid.push_back(synthetic(1.0 + i, 0.1 * i, cs[i]));
  const auto events = detect_events(r, 100.0, 1e9);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].T_loc, 3.0);
  EXPECT_EQ(events[0].magnitude, 300.0);
  EXPECT_EQ(events[1].T_loc, 7.0);
  EXPECT_EQ(events[1].magnitude, 200.0);
}

TEST(ParetoCritical, Examples) {
  EXPECT_EQ(pareto_critical(2.0), 2.0);
  EXPECT_EQ(pareto_critical(1.0), 1.0);
  EXPECT_EQ(pareto_critical(0.5), 0.5);
}

TEST(EventKindNames, Distinct) {
  EXPECT_EQ(to_string(EventKind::c_divergence), "C-divergence");
  EXPECT_EQ(to_string(EventKind::s_jump), "S-jump");
  EXPECT_EQ(to_string(EventKind::validity_boundary), "validity-boundary");
  EXPECT_EQ(to_string(EventKind::gamma_pole_predicted), "gamma-pole-predicted");
}
