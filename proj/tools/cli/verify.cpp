#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "ecotherm/catalog.hpp"
#include "ecotherm/exchange.hpp"
#include "ecotherm/phase.hpp"
#include "ecotherm/thermo.hpp"

namespace ecotherm::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Tally {
  double worst = 0.0;
  std::vector<std::string> misses;
  std::string note;

  // Error is relative to max(1, |want|) unless relative is set.
  void close(const std::string& what, double got, double want, double tol, bool relative = false) {
    const double scale = relative ? std::fabs(want) : std::max(1.0, std::fabs(want));
    const double err = std::fabs(got - want) / scale;
    worst = std::max(worst, err);
    if (!(err <= tol))
      misses.push_back(what + ": got " + fmt(got) + ", expected " + fmt(want) + " (tol " +
                       fmt(tol) + ")");
  }
  void absolute(const std::string& what, double got, double want, double tol) {
    const double err = std::fabs(got - want);
    worst = std::max(worst, err);
    if (!(err <= tol))
      misses.push_back(what + ": got " + fmt(got) + ", expected " + fmt(want) + " (abs tol " +
                       fmt(tol) + ")");
  }
  void require(bool ok, const std::string& what) {
    if (!ok) misses.push_back(what);
  }
};

CheckResult run_check(std::string name, const std::function<void(Tally&)>& body) {
  const auto start = Clock::now();
  Tally t;
  try {
    body(t);
  } catch (const std::exception& e) {
    t.misses.push_back(std::string("error: ") + e.what());
  }
  CheckResult r;
  r.name = std::move(name);
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  r.passed = t.misses.empty();
  if (r.passed) {
    r.detail = "max error " + fmt(t.worst);
    if (!t.note.empty()) r.detail += "; " + t.note;
  } else {
    for (std::size_t i = 0; i < t.misses.size() && i < 3; ++i)
      r.detail += (i ? "; " : "") + t.misses[i];
    if (t.misses.size() > 3) r.detail += "; ... " + std::to_string(t.misses.size() - 3) + " more";
  }
  return r;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

FamilyParams monomial(double c1, double delta) {
  FamilyParams p;
  p.family = Family::monomial;
  p.c1 = c1;
  p.delta = delta;
  return p;
}

FamilyParams pareto(double c1, double x) {
  FamilyParams p;
  p.family = Family::pareto;
  p.c1 = c1;
  p.x = x;
  return p;
}

struct FamilyCase {
  FamilyParams params;
  std::vector<double> temperatures;
};

std::vector<FamilyCase> family_cases() {
  std::vector<FamilyCase> cases;
  FamilyParams p;

  p = {};
  p.family = Family::constant;
  p.c0 = 5.0;
  p.lambdas = {2.0, 0.5};
  cases.push_back({p, {0.5, 1.0, 2.0}});
  p.lambdas.clear();
  p.n = 1;
  p.measure_factor = 3.0;
  cases.push_back({p, {1.0, 4.0}});

  p = {};
  p.family = Family::single_linear;
  p.c1 = 1.5;
  p.measure_factor = 2.0;
  cases.push_back({p, {0.5, 1.0, 3.0}});

  p = {};
  p.family = Family::general_linear;
  p.c0 = 1.0;
  p.coefficients = {1.0, 2.0, 3.0};
  cases.push_back({p, {0.5, 1.0, 2.0}});

  p = {};
  p.family = Family::quadratic;
  p.c1 = 2.0;
  cases.push_back({p, {0.5, 1.0, 4.0}});

  cases.push_back({monomial(1.5, 0.5), {0.5, 2.0}});
  cases.push_back({monomial(1.0, 2.0), {1.0, 4.0}});
  cases.push_back({monomial(2.0, 3.0), {0.5, 2.0}});

  cases.push_back({pareto(2.0, 1.0), {0.5, 1.0, 1.5}});
  cases.push_back({pareto(3.0, 2.0), {1.0}});

  p = {};
  p.family = Family::gamma;
  p.c1 = 1.0;
  p.delta = 1.0;
  p.d1 = -1.0;
  cases.push_back({p, {1.0, 2.0}});
  p.c1 = 2.0;
  p.delta = 0.5;
  p.d1 = 0.3;
  cases.push_back({p, {1.0, 3.0}});
  return cases;
}

void compare_states(Tally& t, const std::string& label, const ThermoState& num,
                    const ThermoState& ref) {
  t.close(label + " Q", num.Q, ref.Q, 1e-8, true);
  t.close(label + " f", num.f, ref.f, 1e-6);
  t.close(label + " S", num.S, ref.S, 1e-6);
  t.close(label + " <m>", num.mean_m, ref.mean_m, 1e-6);
  t.close(label + " C", num.C, ref.C, 1e-4);
  t.require(num.y.size() == ref.y.size(), label + " y has the wrong length");
  for (std::size_t k = 0; k < std::min(num.y.size(), ref.y.size()); ++k)
    t.close(label + " y" + std::to_string(k + 1), num.y[k], ref.y[k], 1e-6);
  const double legendre = std::fabs(num.f - (num.mean_m - num.T * num.S));
  t.require(legendre <= 1e-6 * std::max(1.0, std::fabs(num.f)),
            label + " Legendre residual " + fmt(legendre));
}

bool is_zero_event_scan(const ModelSpec& spec, double t_min, double t_max, std::string& why) {
  const PhaseScanReport r = scan_temperature(spec, t_min, t_max, 50);
  for (const auto& p : r.grid)
    if (!p.state) {
      why = "point T=" + fmt(p.T) + " failed: " + p.failure;
      return false;
    }
  if (!r.events.empty()) {
    why = std::to_string(r.events.size()) + " event(s), first " +
          std::string(to_string(r.events.front().kind)) + " at T=" + fmt(r.events.front().T_loc);
    return false;
  }
  return true;
}

}  // namespace

std::vector<CheckResult> family_checks(std::optional<Family> only) {
  std::vector<CheckResult> results;
  const auto cases = family_cases();
  for (Family family : all_families) {
    if (only && *only != family) continue;
    results.push_back(run_check("family/" + std::string(to_string(family)), [&](Tally& t) {
      for (const auto& c : cases) {
        if (c.params.family != family) continue;
        const ModelSpec spec = make_model(c.params);
        for (double T : c.temperatures) {
          const std::string label = "T=" + fmt(T);
          compare_states(t, label, thermo_state(spec, T), closed_form(c.params, T));
          t.close(label + " S(direct)", entropy(spec, T, EntropyMethod::direct),
                  closed_form(c.params, T).S, 1e-6);
        }
      }
    }));
  }
  return results;
}

std::vector<CheckResult> acceptance_checks() {
  std::vector<CheckResult> results;
  const double deltas[] = {0.5, 1.0, 2.0, 3.0};
  const double temps[] = {0.5, 1.0, 2.0, 4.0};

  results.push_back(run_check("A1 monomial mean money <m> = T/delta", [&](Tally& t) {
    const auto start = Clock::now();
    for (double d : deltas)
      for (double T : temps)
        t.close("delta=" + fmt(d) + " T=" + fmt(T), mean_money(make_model(monomial(1.0, d)), T),
                T / d, 1e-6, true);
    const double s = seconds_since(start);
    t.require(s < 1.0, "runtime " + fmt(s) + " s exceeds 1 s");
    t.note = "runtime " + fmt(s) + " s";
  }));

  results.push_back(run_check("A2 monomial heat capacity C = 1/delta", [&](Tally& t) {
    for (double d : deltas)
      for (double T : temps)
        t.close("delta=" + fmt(d) + " T=" + fmt(T), heat_capacity(make_model(monomial(1.0, d)), T),
                1.0 / d, 1e-4);
  }));

  results.push_back(run_check("A3 single_linear Q, f, S, <m> and S = 1 + ln(<m>/c1)", [&](Tally& t) {
    for (double c1 : {1.0, 2.5}) {
      FamilyParams p;
      p.family = Family::single_linear;
      p.c1 = c1;
      const ModelSpec spec = make_model(p);
      for (double T : {0.5, 1.0, 3.0}) {
        const std::string label = "c1=" + fmt(c1) + " T=" + fmt(T);
        const ThermoState s = thermo_state(spec, T);
        t.close(label + " Q", s.Q, T / c1, 1e-6, true);
        t.close(label + " f", s.f, -T * std::log(T / c1), 1e-6);
        t.close(label + " S", s.S, 1.0 + std::log(T / c1), 1e-6);
        t.close(label + " <m>", s.mean_m, T, 1e-6, true);
        t.close(label + " fundamental relation", s.S, 1.0 + std::log(s.mean_m / c1), 1e-6);
      }
    }
  }));

  results.push_back(run_check("A4 general_linear n=3 <m> = c0 + nT, S = n + ln(T^n/c)", [&](Tally& t) {
    FamilyParams p;
    p.family = Family::general_linear;
    p.c0 = 1.0;
    p.coefficients = {1.0, 2.0, 3.0};
    const ModelSpec spec = make_model(p);
    t.require(detect_separability(spec.money).size() == 3, "model is not factorized into 3 groups");
    for (double T : {0.5, 1.0, 2.0}) {
      const ThermoState s = thermo_state(spec, T);
      t.close("T=" + fmt(T) + " <m>", s.mean_m, 1.0 + 3.0 * T, 1e-6, true);
      t.close("T=" + fmt(T) + " S", s.S, 3.0 + std::log(T * T * T / 6.0), 1e-6);
    }
  }));

  results.push_back(run_check("A5 pareto Q, S, <m>, y_x, C", [&](Tally& t) {
    for (auto [c1, x, T] : {std::array{2.0, 1.0, 1.0}, std::array{3.0, 2.0, 1.0}}) {
      const FamilyParams p = pareto(c1, x);
      const ThermoState s = thermo_state(make_model(p), T);
      const std::string label = "(c1,x,T)=(" + fmt(c1) + "," + fmt(x) + "," + fmt(T) + ")";
      const double alpha = c1 / T - 1.0;
      t.close(label + " Q", s.Q, 1.0 / (alpha * std::pow(x, alpha)), 1e-6, true);
      t.close(label + " S", s.S, c1 / (c1 - T) + std::log(x * T / (c1 - T)), 1e-6);
      t.close(label + " <m>", s.mean_m, c1 * T / (c1 - T) + c1 * std::log(x), 1e-6);
      t.close(label + " C", s.C, std::pow(c1 / (c1 - T), 2), 1e-6);
      t.require(s.y.size() == 1, label + " y_x missing");
      if (s.y.size() == 1) t.close(label + " y_x", s.y[0], -(c1 - T) / x, 1e-6);
      if (c1 == 2.0) {
        t.close(label + " C = 4", s.C, 4.0, 1e-6);
        if (s.y.size() == 1) t.close(label + " y_x = -1", s.y[0], -1.0, 1e-6);
      }
    }
  }));

  results.push_back(run_check("A6 gamma reduces to monomial; poles d1/(1+k delta)", [&](Tally& t) {
    for (double delta : {1.0, 2.0})
      for (double T : {1.0, 4.0}) {
        FamilyParams g;
        g.family = Family::gamma;
        g.c1 = 1.0;
        g.delta = delta;
        g.d1 = 1e-4 * T;
        t.close("delta=" + fmt(delta) + " T=" + fmt(T), gamma_partition(g, T),
                closed_form(monomial(1.0, delta), T).Q, 1e-3, true);
      }
    const std::vector<double> poles = gamma_poles(1.0, 1.0, 3);
    const std::vector<double> expected = {1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0};
    t.require(poles == expected, "gamma_poles(1, 1, 3) != {1, 1/2, 1/3, 1/4}");
  }));

  results.push_back(run_check("A7 phase scan: pareto C >= 100 at T = 1.8, slope 2; no events", [&](Tally& t) {
    // Step 0.02 puts T = 1.8 on the grid.
    const PhaseScanReport r = scan_temperature(make_model(pareto(2.0, 1.0)), 0.5, 1.9, 71);
    const ScanPoint* at = nullptr;
    for (const auto& p : r.grid)
      if (std::fabs(p.T - 1.8) < 1e-9) at = &p;
    t.require(at && at->state, "no valid grid point at T = 1.8");
    bool detected = false;
    for (const auto& e : r.events)
      if (e.kind == EventKind::c_divergence && e.T_loc <= 1.8 + 1e-9 && e.T_loc > 1.78)
        detected = true;
    t.require(detected, "no C-divergence event starting at T = 1.8");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& p : r.grid) {
      if (!p.state || p.T < 1.0 - 1e-12 || p.T > 1.9 + 1e-12) continue;
      const double x = -std::log(2.0 - p.T), y = std::log(p.state->C);
      sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    t.close("log-log slope", slope, 2.0, 0.05 / 2.0, true);
    t.note = "slope " + fmt(slope);

    std::string why;
    FamilyParams p = monomial(1.0, 2.0);
    t.require(is_zero_event_scan(make_model(p), 0.1, 10.0, why), "monomial scan: " + why);
    p = {};
    p.family = Family::single_linear;
    t.require(is_zero_event_scan(make_model(p), 0.1, 10.0, why), "single_linear scan: " + why);
    p.family = Family::general_linear;
    p.c0 = 1.0;
    p.coefficients = {1.0, 2.0, 3.0};
    t.require(is_zero_event_scan(make_model(p), 0.1, 10.0, why), "general_linear scan: " + why);
    p = {};
    p.family = Family::constant;
    p.c0 = 5.0;
    p.lambdas = {2.0};
    t.require(is_zero_event_scan(make_model(p), 0.1, 10.0, why), "constant scan: " + why);
  }));

  results.push_back(run_check("A8 first-law residual and step halving", [&](Tally& t) {
    const ModelSpec mono = make_model(monomial(1.0, 2.0));
    const double r1 = first_law_residual(mono, 1.0, 1e-3, {});
    const double r2 = first_law_residual(mono, 1.0, 5e-4, {});
    const ModelSpec par = make_model(pareto(2.0, 1.0));
    const double dx1[] = {1e-3}, dx2[] = {5e-4};
    const double p1 = first_law_residual(par, 1.0, 0.0, dx1);
    const double p2 = first_law_residual(par, 1.0, 0.0, dx2);
    t.require(r1 <= 1e-5, "monomial residual " + fmt(r1) + " > 1e-5");
    t.require(p1 <= 1e-5, "pareto residual " + fmt(p1) + " > 1e-5");
    t.require(r1 >= 3.0 * r2, "monomial halving ratio " + fmt(r1 / r2) + " < 3");
    t.require(p1 >= 3.0 * p2, "pareto halving ratio " + fmt(p1 / p2) + " < 3");
    t.worst = std::max(r1, p1);
    t.note = "halving ratios " + fmt(r1 / r2) + ", " + fmt(p1 / p2);
  }));

  results.push_back(run_check("A9 entropy routes -df/dT and <-ln rho> agree", [&](Tally& t) {
    for (const auto& c : family_cases()) {
      const ModelSpec spec = make_model(c.params);
      for (double T : c.temperatures)
        t.absolute(std::string(to_string(c.params.family)) + " T=" + fmt(T),
                   entropy(spec, T, EntropyMethod::derivative),
                   entropy(spec, T, EntropyMethod::direct), 1e-6);
    }
  }));

  results.push_back(run_check("A10 kinetic simulation: uniform_pair equilibrium", [&](Tally& t) {
    const auto start = Clock::now();
    const std::size_t N = 10000;
    const double M = 10000.0;
    Ensemble e = init_ensemble(N, M, 42, InitMode::equal, UniformPair{});
    const double s0 = empirical_entropy(e, 100);
    e = run(std::move(e), 1000);
    const double s1 = empirical_entropy(e, 100);
    e = run(std::move(e), 1000000 - 1000);
    const double s2 = empirical_entropy(e, 100);
    e = run(std::move(e), 10000000 - 1000000);
    const FitResult fit = fit_boltzmann(e);
    t.require(conservation_drift(e) <= 1e-9 * M, "conservation drift " + fmt(conservation_drift(e)));
    t.close("T_hat", fit.T_hat, 1.0, 0.03, true);
    t.require(fit.ks_stat < 0.02, "KS distance " + fmt(fit.ks_stat) + " >= 0.02");
    t.require(s0 <= s1 && s1 <= s2, "entropy not non-decreasing: " + fmt(s0) + ", " + fmt(s1) +
                                        ", " + fmt(s2));
    t.require(std::all_of(e.holdings.begin(), e.holdings.end(), [](double h) { return h >= 0.0; }),
              "negative holding");
    const double s = seconds_since(start);
    t.require(s < 30.0, "runtime " + fmt(s) + " s exceeds 30 s");
    t.note = "T_hat " + fmt(fit.T_hat) + ", KS " + fmt(fit.ks_stat) + ", runtime " + fmt(s) + " s";
  }));

  results.push_back(run_check("A11 multiplicative_save s=0.5 rejects the exponential", [&](Tally& t) {
    Ensemble e = init_ensemble(10000, 10000.0, 42, InitMode::equal, MultiplicativeSave{0.5});
    e = run(std::move(e), 10000000);
    const FitResult fit = fit_boltzmann(e);
    t.require(fit.ks_stat > 0.05, "KS distance " + fmt(fit.ks_stat) + " <= 0.05");
    t.note = "KS " + fmt(fit.ks_stat);
  }));

  results.push_back(run_check("A12 parsed c1*l1^2 reproduces monomial delta=2", [&](Tally& t) {
    const ModelSpec mono = make_model(monomial(1.0, 2.0));
    const ModelSpec parsed{parse_money_fn("c1*l1^2", 1), {{0.0, inf}}, {{"c1", 1.0}}, 1.0, {}, {}};
    for (double T : {1.0, 4.0}) {
      const ThermoState a = thermo_state(parsed, T);
      const ThermoState b = thermo_state(mono, T);
      const std::string label = "T=" + fmt(T);
      t.close(label + " Q", a.Q, b.Q, 1e-8);
      t.close(label + " f", a.f, b.f, 1e-8);
      t.close(label + " S", a.S, b.S, 1e-8);
      t.close(label + " <m>", a.mean_m, b.mean_m, 1e-8);
      t.close(label + " C", a.C, b.C, 1e-8);
      t.close(label + " Q vs closed form", a.Q, closed_form(monomial(1.0, 2.0), T).Q, 1e-8, true);
    }
  }));

  return results;
}

int print_report(const std::vector<CheckResult>& results, std::ostream& out) {
  std::size_t failed = 0;
  for (const auto& r : results) {
    failed += r.passed ? 0 : 1;
    char seconds[32];
    std::snprintf(seconds, sizeof seconds, "%.3f", r.seconds);
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " [" << seconds
        << " s]\n";
  }
  out << results.size() - failed << "/" << results.size() << " checks passed\n";
  for (const auto& r : results)
    if (!r.passed) out << "failing check: " << r.name << '\n';
  return failed == 0 ? 0 : 2;
}

}  // namespace ecotherm::cli
