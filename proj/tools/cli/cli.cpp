#include "cli.hpp"

#include <cstdint>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecotherm/catalog.hpp"
#include "ecotherm/error.hpp"
#include "ecotherm/exchange.hpp"
#include "ecotherm/phase.hpp"
#include "ecotherm/thermo.hpp"
#include "model_file.hpp"
#include "report.hpp"
#include "verify.hpp"

#ifndef ECOTHERM_VERSION
#define ECOTHERM_VERSION "unknown"
#endif

namespace ecotherm::cli {

namespace {

struct AnalyzeArgs {
  std::string model;
  double t_min = 0.0;
  std::optional<double> t_max;
  int steps = 10;
  std::string out;
  double rel_tol = 1e-10;
  bool near_critical = false;
  bool no_factorize = false;
  std::string method = "numeric";
};

struct ScanArgs {
  std::string model;
  double t_min = 0.0;
  double t_max = 0.0;
  int steps = 50;
  std::string out;
  std::string events;
  double c_threshold = 100.0;
  double s_jump = 10.0;
  double rel_tol = 1e-10;
  bool no_continuation = false;
};

struct SimulateArgs {
  std::size_t n = 10000;
  std::optional<double> m;
  std::string rule = "uniform_pair";
  std::optional<double> delta;
  std::optional<double> save;
  std::optional<std::uint64_t> steps;
  std::uint64_t seed = 42;
  std::string init = "equal";
  std::size_t bins = 100;
  std::string hist_out;
  std::string meta_out;
};

struct EvalArgs {
  std::string expr;
  std::vector<double> point;
  std::vector<std::string> constants;
};

struct VerifyArgs {
  std::string family = "all";
  std::string json_out;
};

std::vector<double> temperature_grid(double t_min, std::optional<double> t_max, int steps) {
  if (!t_max || steps == 1) return {t_min};
  std::vector<double> grid;
  for (int i = 0; i < steps; ++i)
    grid.push_back(i + 1 == steps ? *t_max : t_min + (*t_max - t_min) * i / (steps - 1));
  return grid;
}

ThermoOptions thermo_options(double rel_tol, bool near_critical, bool factorize) {
  ThermoOptions o;
  o.numeric.quad.rel_tol = rel_tol;
  o.numeric.validity.near_critical = near_critical;
  o.numeric.factorize = factorize;
  return o;
}

int analyze(const AnalyzeArgs& a, std::ostream& out) {
  const ModelSpec spec = load_model(a.model);
  if (a.t_max && !(*a.t_max > a.t_min)) throw Error("--t-max must exceed --t-min");
  const ThermoOptions options = thermo_options(a.rel_tol, a.near_critical, !a.no_factorize);
  const bool closed = a.method == "closed-form";
  const FamilyParams params = closed ? family_params(spec) : FamilyParams{};

  std::vector<ThermoState> states;
  for (double T : temperature_grid(a.t_min, a.t_max, a.steps)) {
    try {
      states.push_back(closed ? closed_form(params, T, options.numeric.validity)
                              : thermo_state(spec, T, options));
    } catch (const Error& e) {
      std::ostringstream where;
      where << "at T = " << std::setprecision(17) << T << ": " << e.what();
      throw Error(where.str());
    }
  }
  std::ostringstream csv;
  write_states_csv(csv, spec, states);
  emit(a.out, csv.str(), out);
  return exit_ok;
}

int scan(const ScanArgs& a, std::ostream& out) {
  const ModelSpec spec = load_model(a.model);
  ScanOptions options;
  options.thermo = thermo_options(a.rel_tol, false, true);
  options.c_threshold = a.c_threshold;
  options.s_jump_factor = a.s_jump;
  options.gamma_continuation = !a.no_continuation;
  const PhaseScanReport report = scan_temperature(spec, a.t_min, a.t_max, a.steps, options);

  std::ostringstream csv;
  write_scan_csv(csv, spec, report);
  const std::string events = scan_events_json(spec, report).dump(2) + "\n";
  if (a.out.empty() && a.events.empty()) {
    out << csv.str() << events;
    return exit_ok;
  }
  emit(a.out, csv.str(), out);
  emit(a.events, events, out);
  return exit_ok;
}

int simulate(const SimulateArgs& a, std::ostream& out) {
  ExchangeRule rule;
  if (a.rule == "uniform_pair") {
    rule = UniformPair{};
  } else if (a.rule == "fixed_transfer") {
    rule = FixedTransfer{a.delta.value_or(0.1)};
  } else {
    rule = MultiplicativeSave{a.save.value_or(0.5)};
  }
  if (a.delta && a.rule != "fixed_transfer") throw Error("--delta only applies to fixed_transfer");
  if (a.save && a.rule != "multiplicative_save")
    throw Error("--save only applies to multiplicative_save");

  const double total = a.m.value_or(static_cast<double>(a.n));
  const std::uint64_t steps = a.steps.value_or(1000 * static_cast<std::uint64_t>(a.n));
  const InitMode init = a.init == "random" ? InitMode::random : InitMode::equal;

  Ensemble e = init_ensemble(a.n, total, a.seed, init, rule);
  e = run(std::move(e), steps);
  const FitResult fit = fit_boltzmann(e);
  const auto bins = histogram(e.holdings, a.bins);

  nlohmann::ordered_json meta;
  meta["seed"] = a.seed;
  meta["rng"] = Rng::algorithm;
  meta["rule"] = rule_name(rule);
  if (const auto* f = std::get_if<FixedTransfer>(&rule)) meta["delta"] = f->delta;
  if (const auto* s = std::get_if<MultiplicativeSave>(&rule)) meta["save"] = s->saving;
  meta["N"] = a.n;
  meta["M"] = total;
  meta["steps"] = steps;
  meta["init"] = a.init;
  meta["T_hat"] = fit.T_hat;
  meta["ks_stat"] = fit.ks_stat;
  meta["tail_alpha"] = fit.tail_alpha ? nlohmann::ordered_json(*fit.tail_alpha) : nullptr;
  meta["degenerate"] = fit.degenerate;
  meta["conservation_drift"] = conservation_drift(e);
  meta["bins"] = a.bins;
  meta["empirical_entropy"] = a.bins >= 10 ? nlohmann::ordered_json(empirical_entropy(e, a.bins))
                                           : nlohmann::ordered_json(nullptr);

  if (!a.hist_out.empty()) {
    std::ostringstream csv;
    write_histogram_csv(csv, bins);
    emit(a.hist_out, csv.str(), out);
  }
  emit(a.meta_out, meta.dump(2) + "\n", out);
  return exit_ok;
}

int eval(const EvalArgs& a, std::ostream& out) {
  ConstantMap constants;
  for (const auto& item : a.constants) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("--const expects name=value, got '" + item + "'");
    const std::string value = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw Error("--const value is not a number: '" + item + "'");
    constants[item.substr(0, eq)] = v;
  }
  const MoneyExpr expr = parse_money_fn(a.expr, a.point.size());
  out << format_real(eval_money_fn(expr, a.point, constants)) << '\n';
  return exit_ok;
}

int verify(const VerifyArgs& a, std::ostream& out) {
  std::optional<Family> only;
  if (a.family != "all") {
    only = family_from_string(a.family);
    if (!only) throw Error("unknown family '" + a.family + "' (use all or a family tag)");
  }
  std::vector<CheckResult> results = family_checks(only);
  for (auto& r : acceptance_checks()) results.push_back(std::move(r));

  const int code = print_report(results, out);
  if (!a.json_out.empty()) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& r : results)
      doc.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    emit(a.json_out, doc.dump(2) + "\n", out);
  }
  return code;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Statistical thermodynamics of money functions.", "ecotherm"};
  app.set_version_flag("--version", ECOTHERM_VERSION);
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Thermodynamic state on a temperature grid (CSV)");
  analyze_cmd->add_option("--model", an.model, "Model JSON file")->required();
  analyze_cmd->add_option("--t-min", an.t_min, "Lowest temperature (alone: single point)")->required();
  analyze_cmd->add_option("--t-max", an.t_max, "Highest temperature");
  analyze_cmd->add_option("--steps", an.steps, "Grid points, inclusive of both ends")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--out", an.out, "CSV output path (default stdout)");
  analyze_cmd->add_option("--rel-tol", an.rel_tol, "Quadrature relative tolerance")
      ->capture_default_str();
  analyze_cmd->add_flag("--near-critical", an.near_critical,
                        "Lift the pareto margin and continue gamma past its first pole");
  analyze_cmd->add_flag("--no-factorize", an.no_factorize,
                        "Integrate the full money function instead of separable groups");
  analyze_cmd->add_option("--method", an.method, "numeric or closed-form")
      ->capture_default_str()
      ->check(CLI::IsMember({"numeric", "closed-form"}));

  ScanArgs sc;
  auto* scan_cmd = app.add_subcommand("scan", "Phase scan: grid CSV and event JSON");
  scan_cmd->add_option("--model", sc.model, "Model JSON file")->required();
  scan_cmd->add_option("--t-min", sc.t_min, "Lowest temperature")->required();
  scan_cmd->add_option("--t-max", sc.t_max, "Highest temperature")->required();
  scan_cmd->add_option("--steps", sc.steps, "Grid points")->capture_default_str();
  scan_cmd->add_option("--out", sc.out, "Grid CSV path");
  scan_cmd->add_option("--events", sc.events, "Event JSON path");
  scan_cmd->add_option("--c-threshold", sc.c_threshold, "Heat-capacity threshold")
      ->capture_default_str();
  scan_cmd->add_option("--s-jump", sc.s_jump, "Entropy jump factor")->capture_default_str();
  scan_cmd->add_option("--rel-tol", sc.rel_tol, "Quadrature relative tolerance")
      ->capture_default_str();
  scan_cmd->add_flag("--no-continuation", sc.no_continuation,
                     "Record gamma points past the first pole as failures");

  SimulateArgs si;
  auto* simulate_cmd = app.add_subcommand("simulate", "Kinetic exchange simulation");
  simulate_cmd->add_option("--n", si.n, "Number of agents")->capture_default_str();
  simulate_cmd->add_option("--m", si.m, "Total money (default N)");
  simulate_cmd->add_option("--rule", si.rule, "uniform_pair, fixed_transfer or multiplicative_save")
      ->capture_default_str()
      ->check(CLI::IsMember({"uniform_pair", "fixed_transfer", "multiplicative_save"}));
  simulate_cmd->add_option("--delta", si.delta, "fixed_transfer amount (default 0.1)");
  simulate_cmd->add_option("--save", si.save, "multiplicative_save fraction (default 0.5)");
  simulate_cmd->add_option("--steps", si.steps, "Pairwise exchanges (default 1000 N)");
  simulate_cmd->add_option("--seed", si.seed, "RNG seed")
      ->capture_default_str()
      ->envname("ECOTHERM_SEED");
  simulate_cmd->add_option("--init", si.init, "equal or random")
      ->capture_default_str()
      ->check(CLI::IsMember({"equal", "random"}));
  simulate_cmd->add_option("--bins", si.bins, "Histogram bins")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--hist-out", si.hist_out, "Histogram CSV path");
  simulate_cmd->add_option("--meta-out", si.meta_out, "Run metadata JSON path (default stdout)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Parse a money function and evaluate it at a point");
  eval_cmd->add_option("--expr", ev.expr, "Expression, e.g. c1*l1^2")->required();
  eval_cmd->add_option("--point", ev.point, "Values of l1..ln")->required()->expected(1, 64);
  eval_cmd->add_option("--const", ev.constants, "Named constant, name=value (repeatable)");

  VerifyArgs ve;
  auto* verify_cmd = app.add_subcommand("verify", "Closed-form cross-checks and acceptance suite");
  verify_cmd->add_option("--family", ve.family, "all or a family tag")->capture_default_str();
  verify_cmd->add_option("--json", ve.json_out, "Also write results as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_error;
  }

  try {
    if (analyze_cmd->parsed()) return analyze(an, out);
    if (scan_cmd->parsed()) return scan(sc, out);
    if (simulate_cmd->parsed()) return simulate(si, out);
    if (eval_cmd->parsed()) return eval(ev, out);
    if (verify_cmd->parsed()) return verify(ve, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}

}  // namespace ecotherm::cli
