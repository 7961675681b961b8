#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "ecotherm/model.hpp"

namespace ecotherm::cli {

// Model files are JSON; the schema is described in docs/model_schema.md.
// Every schema problem is collected and reported in one Error.
ModelSpec model_from_json(const nlohmann::json& doc);
ModelSpec parse_model(std::string_view text);
ModelSpec load_model(const std::filesystem::path& path);

// Canonical JSON form of a spec (expression models print the money function).
nlohmann::ordered_json model_to_json(const ModelSpec& spec);

}  // namespace ecotherm::cli
