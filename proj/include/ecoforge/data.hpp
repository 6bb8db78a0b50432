#pragma once

#include "ecoforge/json_canon.hpp"

#include <string>
#include <string_view>

namespace ecoforge::data {

// Tables compiled in from data/*.json at build time.
std::string_view embedded(std::string_view file_name);

// Parsed once, then shared read-only.
const Json& table(std::string_view file_name);

// Root of the shipped data directory (fixtures, bundled models, golden files).
// ECOFORGE_SHARE_DIR overrides the build-time location.
std::string share_dir();

} // namespace ecoforge::data
