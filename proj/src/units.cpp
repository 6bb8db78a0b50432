#include "ecoforge/units.hpp"
#include "ecoforge/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

namespace ecoforge::units {

namespace {

enum class Dim { Time, Mass, Count };

// factor: multiply to reach the base unit (months, kg); divisor: then divide.
// Keeping both lets each documented conversion be a single exact operation.
struct Unit {
    std::string_view name;
    Dim dim;
    double factor;
    double divisor;
};

constexpr std::array<Unit, 16> kUnits = {{
    {"months", Dim::Time, 1, 1},
    {"month", Dim::Time, 1, 1},
    {"mo", Dim::Time, 1, 1},
    {"years", Dim::Time, kMonthsPerYear, 1},
    {"year", Dim::Time, kMonthsPerYear, 1},
    {"yr", Dim::Time, kMonthsPerYear, 1},
    {"y", Dim::Time, kMonthsPerYear, 1},
    {"days", Dim::Time, 1, kDaysPerMonth},
    {"day", Dim::Time, 1, kDaysPerMonth},
    {"d", Dim::Time, 1, kDaysPerMonth},
    {"kg", Dim::Mass, 1, 1},
    {"g", Dim::Mass, 1, 1000},
    {"mg", Dim::Mass, 1, 1e6},
    {"lb", Dim::Mass, 0.45359237, 1},
    {"count", Dim::Count, 1, 1},
    {"", Dim::Count, 1, 1},
}};

std::optional<Unit> find(std::string_view name)
{
    for (const auto& u : kUnits)
        if (u.name == name)
            return u;
    return std::nullopt;
}

std::string lower(std::string_view s)
{
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> split(const std::string& s)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find('/', start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

// Parsed compound unit: numerator (mass, time or count), optional per-area, optional per-time.
struct Compound {
    Unit numerator;
    bool per_area = false;
    std::optional<Unit> per_time;
};

std::optional<Compound> parse(std::string_view text)
{
    auto parts = split(lower(text));
    if (parts.size() > 3)
        return std::nullopt;
    auto num = find(parts[0]);
    if (!num)
        return std::nullopt;
    Compound c{*num, false, std::nullopt};
    std::size_t i = 1;
    if (i < parts.size() && (parts[i] == "m2" || parts[i] == "m^2")) {
        c.per_area = true;
        ++i;
    }
    if (i < parts.size()) {
        auto t = find(parts[i]);
        if (!t || t->dim != Dim::Time)
            return std::nullopt;
        c.per_time = t;
        ++i;
    }
    if (i != parts.size())
        return std::nullopt;
    if ((c.per_area || c.per_time) && c.numerator.dim != Dim::Mass)
        return std::nullopt;
    return c;
}

[[noreturn]] void unsupported(std::string_view unit, std::string_view target)
{
    throw Error(ErrorCode::UnsupportedUnit,
                "cannot convert '" + std::string(unit) + "' to '" + std::string(target) + "'", std::string(unit));
}

} // namespace

bool is_supported(std::string_view unit)
{
    return parse(unit).has_value();
}

std::vector<std::string> supported_units()
{
    std::vector<std::string> out;
    for (const auto& u : kUnits)
        out.emplace_back(u.name);
    return out;
}

double normalize_unit(double value, std::string_view unit, std::string_view target)
{
    auto from = parse(unit);
    auto to = parse(target);
    if (!from || !to || from->numerator.dim != to->numerator.dim || from->per_area != to->per_area ||
        from->per_time.has_value() != to->per_time.has_value())
        unsupported(unit, target);

    // numerator: into base, then out to target
    double v = value;
    if (from->numerator.factor != 1)
        v *= from->numerator.factor;
    if (from->numerator.divisor != 1)
        v /= from->numerator.divisor;
    if (to->numerator.divisor != 1)
        v *= to->numerator.divisor;
    if (to->numerator.factor != 1)
        v /= to->numerator.factor;

    // per-time denominator converts inversely
    if (from->per_time) {
        if (from->per_time->factor != 1)
            v /= from->per_time->factor;
        if (from->per_time->divisor != 1)
            v *= from->per_time->divisor;
        if (to->per_time->divisor != 1)
            v /= to->per_time->divisor;
        if (to->per_time->factor != 1)
            v *= to->per_time->factor;
    }
    return v;
}

} // namespace ecoforge::units
