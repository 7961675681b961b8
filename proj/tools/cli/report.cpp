#include "report.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "ecotherm/error.hpp"

namespace ecotherm::cli {

namespace {

void write_header(std::ostream& out, const ModelSpec& spec, bool with_status) {
  out << "T";
  if (with_status) out << ",status";
  out << ",Q,f,S,mean_m,C";
  for (const auto& m : spec.macro_params) out << ",y_" << m.name;
  out << ",residual_legendre\n";
}

void write_state_fields(std::ostream& out, const ThermoState& s, std::size_t n_y) {
  out << ',' << format_real(s.Q) << ',' << format_real(s.f) << ',' << format_real(s.S) << ','
      << format_real(s.mean_m) << ',' << format_real(s.C);
  for (std::size_t k = 0; k < n_y; ++k) out << ',' << (k < s.y.size() ? format_real(s.y[k]) : "");
  auto it = s.residuals.find("legendre");
  out << ',' << (it == s.residuals.end() ? "" : format_real(it->second));
}

}  // namespace

std::string format_real(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void write_states_csv(std::ostream& out, const ModelSpec& spec, std::span<const ThermoState> states) {
  write_header(out, spec, false);
  for (const auto& s : states) {
    out << format_real(s.T);
    write_state_fields(out, s, spec.macro_params.size());
    out << '\n';
  }
}

void write_scan_csv(std::ostream& out, const ModelSpec& spec, const PhaseScanReport& report) {
  write_header(out, spec, true);
  const std::size_t n_y = spec.macro_params.size();
  for (const auto& p : report.grid) {
    out << format_real(p.T);
    if (!p.state) {
      out << ",failed" << std::string(6 + n_y, ',') << '\n';
      continue;
    }
    out << (p.marked ? ",marked" : ",valid");
    write_state_fields(out, *p.state, n_y);
    out << '\n';
  }
}

nlohmann::ordered_json scan_events_json(const ModelSpec& spec, const PhaseScanReport& report) {
  nlohmann::ordered_json doc;
  doc["family"] = spec.family ? std::string(to_string(*spec.family)) : std::string("expression");
  if (!report.grid.empty()) {
    doc["T_min"] = report.grid.front().T;
    doc["T_max"] = report.grid.back().T;
  }
  doc["steps"] = report.grid.size();
  doc["events"] = nlohmann::ordered_json::array();
  for (const auto& e : report.events)
    doc["events"].push_back(
        {{"T_loc", e.T_loc}, {"kind", std::string(to_string(e.kind))}, {"magnitude", e.magnitude}});
  doc["failures"] = nlohmann::ordered_json::array();
  for (const auto& p : report.grid)
    if (!p.state) doc["failures"].push_back({{"T", p.T}, {"reason", p.failure}});
  return doc;
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_lo,bin_hi,count,density\n";
  for (const auto& b : bins)
    out << format_real(b.lo) << ',' << format_real(b.hi) << ',' << b.count << ','
        << format_real(b.density) << '\n';
}

void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  file << text;
  if (!file) throw Error("failed writing '" + path + "'");
}

}  // namespace ecotherm::cli
