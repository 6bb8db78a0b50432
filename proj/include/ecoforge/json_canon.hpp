#pragma once

#include <json.hpp>

#include <string>

namespace ecoforge {

using Json = nlohmann::json;

// Shortest representation that parses back to the same double.
std::string format_number(double value);

// Canonical document text: UTF-8, keys sorted, two-space indent, LF endings,
// trailing newline, numbers in shortest round-trip form.
std::string canonical_dump(const Json& value);

// Single-line form with the same key and number rules (frames, diagnostics).
std::string compact_dump(const Json& value);

} // namespace ecoforge
