#pragma once

// Minimal TOML reader covering the subset used by experiment configs and
// template files: [table], [[array-of-table]], key = string / integer /
// float / boolean / flat array, and # comments. Parsed into a JSON tree so
// TOML and JSON configs are interchangeable downstream.

#include <string>

#include <json.hpp>

namespace ric {

// Throws std::runtime_error with a line number on malformed input.
nlohmann::json parse_toml(const std::string& text);

// Reads a config file, dispatching on the .json extension; anything else
// is parsed as TOML.
nlohmann::json load_config_file(const std::string& path);

}  // namespace ric
