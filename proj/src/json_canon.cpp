#include "ecoforge/json_canon.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace ecoforge {

namespace {

void write_string(std::string& out, const std::string& s)
{
    out += '"';
    for (unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\b': out += "\\b"; break;
        case '\f': out += "\\f"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (c < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += static_cast<char>(c);
            }
        }
    }
    out += '"';
}

void write_value(std::string& out, const Json& v, int indent, int depth)
{
    const bool pretty = indent > 0;
    auto newline = [&](int d) {
        if (!pretty)
            return;
        out += '\n';
        out.append(static_cast<std::size_t>(d * indent), ' ');
    };

    switch (v.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); break;
    case Json::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); break;
    case Json::value_t::number_float: out += format_number(v.get<double>()); break;
    case Json::value_t::string: write_string(out, v.get_ref<const std::string&>()); break;
    case Json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            break;
        }
        out += '[';
        bool first = true;
        for (const auto& item : v) {
            if (!first)
                out += pretty ? "," : ",";
            first = false;
            newline(depth + 1);
            write_value(out, item, indent, depth + 1);
        }
        newline(depth);
        out += ']';
        break;
    }
    case Json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            break;
        }
        // nlohmann::json objects are std::map backed, so iteration is key-sorted.
        out += '{';
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first)
                out += ',';
            first = false;
            newline(depth + 1);
            write_string(out, it.key());
            out += pretty ? ": " : ":";
            write_value(out, it.value(), indent, depth + 1);
        }
        newline(depth);
        out += '}';
        break;
    }
    default: out += "null"; break;
    }
}

} // namespace

std::string format_number(double value)
{
    if (!std::isfinite(value))
        return "null";
    if (value == 0.0)
        return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string canonical_dump(const Json& value)
{
    std::string out;
    write_value(out, value, 2, 0);
    out += '\n';
    return out;
}

std::string compact_dump(const Json& value)
{
    std::string out;
    write_value(out, value, 0, 0);
    return out;
}

} // namespace ecoforge
