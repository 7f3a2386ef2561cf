#pragma once

#include <string>

#include <json.hpp>

namespace lito {

// Minimal TOML subset sufficient for run configs: [section] / [a.b] tables,
// key = value with strings, integers, floats, booleans, and single-line
// arrays, plus # comments. Parsed into a JSON object tree.
nlohmann::ordered_json parse_toml(const std::string& text);
nlohmann::ordered_json load_toml_file(const std::string& path);

}  // namespace lito
