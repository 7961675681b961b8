#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecotherm/exchange.hpp"
#include "ecotherm/model.hpp"
#include "ecotherm/phase.hpp"
#include "ecotherm/state.hpp"

namespace ecotherm::cli {

// Reals are printed with 17 significant digits so that rows round-trip.
std::string format_real(double v);

// T,Q,f,S,mean_m,C,y_<name>...,residual_legendre
void write_states_csv(std::ostream& out, const ModelSpec& spec, std::span<const ThermoState> states);

// T,status,Q,f,S,mean_m,C,y_<name>...,residual_legendre with status in
// {valid, marked, failed}; failed rows leave the numeric fields empty.
void write_scan_csv(std::ostream& out, const ModelSpec& spec, const PhaseScanReport& report);
nlohmann::ordered_json scan_events_json(const ModelSpec& spec, const PhaseScanReport& report);

// bin_lo,bin_hi,count,density
void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);

// Writes text to path, or to fallback when path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& fallback);

}  // namespace ecotherm::cli
