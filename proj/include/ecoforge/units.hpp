#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ecoforge::units {

// Supported unit spellings:
//   time   months (month, mo), years (year, yr, y), days (day, d)
//   mass   kg, g, mg, lb
//   count  count, "" (dimensionless)
//   rate   <mass>/<time>         e.g. g/day
//   areal  <mass>/m2/<time>      e.g. g/m2/day
// Conversions: years x 12, days / 30.44, g / 1000, mg / 1e6, lb x 0.45359237.
inline constexpr double kDaysPerMonth = 30.44;
inline constexpr double kMonthsPerYear = 12.0;
inline constexpr double kSecondsPerMonth = kDaysPerMonth * 86400.0;

// Throws Error(UnsupportedUnit) when either unit is unknown or the dimensions differ.
double normalize_unit(double value, std::string_view unit, std::string_view target);

bool is_supported(std::string_view unit);

// Spellings accepted by normalize_unit, for documentation and fixture checks.
std::vector<std::string> supported_units();

} // namespace ecoforge::units
