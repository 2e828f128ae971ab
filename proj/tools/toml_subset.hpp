#pragma once

#include <json.hpp>
#include <string>

namespace dblend::cli {

/// Parse the TOML subset used by experiment configs into a JSON tree:
/// [table] / [[array-of-tables]] headers, dotted keys, strings, integers,
/// floats, booleans, and (nested, possibly multi-line) arrays. Inline
/// tables and datetimes are not supported. Throws std::runtime_error with
/// a line number on malformed input.
nlohmann::json parse_toml(const std::string& text);

nlohmann::json parse_toml_file(const std::string& path);

}  // namespace dblend::cli
