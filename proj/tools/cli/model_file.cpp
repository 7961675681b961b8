#include "model_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ecotherm/error.hpp"

namespace ecotherm::cli {

namespace {

using nlohmann::json;

const std::set<std::string, std::less<>> known_keys = {
    "family", "expression", "n_vars", "domain", "constants", "measure_factor", "macro_params"};

// Bounds are numbers or the strings "inf", "-inf" and decimal text.
std::optional<double> bound_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) return std::nullopt;
  const std::string s = v.get<std::string>();
  if (s == "inf" || s == "+inf") return inf;
  if (s == "-inf") return -inf;
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used == s.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

json bound_json(double v) {
  if (v == inf) return "inf";
  if (v == -inf) return "-inf";
  return v;
}

}  // namespace

ModelSpec model_from_json(const json& doc) {
  std::vector<std::string> problems;
  if (!doc.is_object()) throw Error("model file must hold a JSON object");

  for (const auto& [key, _] : doc.items())
    if (!known_keys.contains(key)) problems.push_back("unknown key \"" + key + "\"");

  const bool has_family = doc.contains("family");
  const bool has_expression = doc.contains("expression");
  if (has_family == has_expression)
    problems.push_back("exactly one of \"family\" and \"expression\" must be present");

  std::optional<Family> family;
  if (has_family) {
    if (!doc["family"].is_string())
      problems.push_back("\"family\" must be a string");
    else if (!(family = family_from_string(doc["family"].get<std::string>())))
      problems.push_back("unknown family \"" + doc["family"].get<std::string>() + "\"");
  }
  if (has_expression && !doc["expression"].is_string())
    problems.push_back("\"expression\" must be a string");

  std::size_t n_vars = 0;
  if (!doc.contains("n_vars"))
    problems.push_back("missing key \"n_vars\"");
  else if (!doc["n_vars"].is_number_unsigned() || doc["n_vars"].get<std::size_t>() == 0)
    problems.push_back("\"n_vars\" must be a positive integer");
  else
    n_vars = doc["n_vars"].get<std::size_t>();

  std::vector<Interval> domain;
  if (!doc.contains("domain")) {
    problems.push_back("missing key \"domain\"");
  } else if (!doc["domain"].is_array()) {
    problems.push_back("\"domain\" must be an array of [lower, upper] pairs");
  } else {
    std::size_t i = 0;
    for (const auto& pair : doc["domain"]) {
      ++i;
      const std::string where = "domain[" + std::to_string(i - 1) + "]";
      if (!pair.is_array() || pair.size() != 2) {
        problems.push_back(where + " must be a [lower, upper] pair");
        continue;
      }
      auto lo = bound_value(pair[0]);
      auto hi = bound_value(pair[1]);
      if (!lo || !hi) {
        problems.push_back(where + " bounds must be numbers or \"inf\"/\"-inf\"");
        continue;
      }
      if (!(*lo < *hi)) problems.push_back(where + " requires lower < upper");
      domain.push_back({*lo, *hi});
    }
    if (n_vars != 0 && doc["domain"].size() != n_vars)
      problems.push_back("\"domain\" has " + std::to_string(doc["domain"].size()) +
                         " entries but n_vars is " + std::to_string(n_vars));
  }

  ConstantMap constants;
  if (doc.contains("constants")) {
    if (!doc["constants"].is_object()) {
      problems.push_back("\"constants\" must be an object of name: number");
    } else {
      for (const auto& [name, value] : doc["constants"].items()) {
        if (!value.is_number())
          problems.push_back("constant \"" + name + "\" must be a number");
        else
          constants[name] = value.get<double>();
      }
    }
  }

  double measure_factor = 1.0;
  if (doc.contains("measure_factor")) {
    if (!doc["measure_factor"].is_number() || !(doc["measure_factor"].get<double>() > 0.0))
      problems.push_back("\"measure_factor\" must be a positive number");
    else
      measure_factor = doc["measure_factor"].get<double>();
  }

  std::vector<MacroParam> macro_params;
  if (doc.contains("macro_params")) {
    if (!doc["macro_params"].is_array()) {
      problems.push_back("\"macro_params\" must be an array");
    } else {
      for (const auto& m : doc["macro_params"]) {
        if (!m.is_object() || !m.contains("name") || !m["name"].is_string() || !m.contains("var") ||
            !m["var"].is_number_unsigned() || !m.contains("bound") || !m["bound"].is_string() ||
            (m["bound"] != "lower" && m["bound"] != "upper")) {
          problems.push_back(
              "each macro parameter needs {\"name\": string, \"var\": 1-based index, "
              "\"bound\": \"lower\"|\"upper\"}");
          continue;
        }
        macro_params.push_back({m["name"].get<std::string>(), m["var"].get<std::size_t>(),
                                m["bound"] == "lower" ? Bound::lower : Bound::upper});
      }
    }
  }

  std::optional<MoneyExpr> money;
  if (problems.empty()) {
    if (family) {
      FamilyParams p;
      p.family = *family;
      p.n = n_vars;
      p.coefficients.assign(n_vars, 1.0);
      ModelSpec shape = make_model(p);
      if (shape.n_vars() != n_vars)
        problems.push_back(std::string(to_string(*family)) + " has " +
                           std::to_string(shape.n_vars()) + " variable(s), n_vars is " +
                           std::to_string(n_vars));
      else
        money = shape.money;
      if (*family == Family::pareto &&
          std::none_of(macro_params.begin(), macro_params.end(),
                       [](const MacroParam& m) { return m.name == "x"; }))
        macro_params.insert(macro_params.begin(), {"x", 1, Bound::lower});
    } else {
      std::set<std::string, std::less<>> names;
      for (const auto& [name, _] : constants) names.insert(name);
      try {
        money = parse_money_fn(doc["expression"].get<std::string>(), n_vars, &names);
      } catch (const ParseError& e) {
        problems.push_back(std::string("expression: ") + e.what());
      }
    }
  }

  if (!problems.empty()) {
    std::string message = "invalid model file:";
    for (const auto& p : problems) message += "\n  - " + p;
    throw Error(message);
  }

  ModelSpec spec{*money, std::move(domain), std::move(constants), measure_factor,
                 std::move(macro_params), family};
  validate_model(spec);
  return spec;
}

ModelSpec parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_model(text.str());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json model_to_json(const ModelSpec& spec) {
  nlohmann::ordered_json out;
  if (spec.family)
    out["family"] = std::string(to_string(*spec.family));
  else
    out["expression"] = to_string(spec.money);
  out["n_vars"] = spec.n_vars();
  out["domain"] = nlohmann::ordered_json::array();
  for (const auto& iv : spec.domain) out["domain"].push_back({bound_json(iv.lower), bound_json(iv.upper)});
  out["constants"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : spec.constants) out["constants"][name] = value;
  out["measure_factor"] = spec.measure_factor;
  if (!spec.macro_params.empty()) {
    out["macro_params"] = nlohmann::ordered_json::array();
    for (const auto& m : spec.macro_params)
      out["macro_params"].push_back(
          {{"name", m.name}, {"var", m.variable}, {"bound", m.bound == Bound::lower ? "lower" : "upper"}});
  }
  return out;
}

}  // namespace ecotherm::cli
