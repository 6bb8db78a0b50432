#include "ecoforge/ontology.hpp"
#include "ecoforge/data.hpp"
#include "ecoforge/error.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

namespace ecoforge::ontology {

std::string_view to_string(Sign sign)
{
    return sign == Sign::Positive ? "+" : "-";
}

std::string_view to_string(Direction direction)
{
    return direction == Direction::Forward ? "Forward" : "Inverse";
}

std::optional<Sign> sign_from(std::string_view text)
{
    if (text == "+" || text == "positive" || text == "Positive")
        return Sign::Positive;
    if (text == "-" || text == "negative" || text == "Negative")
        return Sign::Negative;
    return std::nullopt;
}

std::string normalize_name(std::string_view name)
{
    std::string out;
    bool pending_space = false;
    for (char raw : name) {
        auto c = static_cast<unsigned char>(raw);
        if (c == '-')
            continue;
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(c));
    }
    while (!out.empty() && out.back() == '.')
        out.pop_back();
    return out;
}

namespace {

std::vector<GlobiAlias> load_aliases()
{
    std::vector<GlobiAlias> out;
    for (const auto& entry : data::table("aliases.json").at("aliases")) {
        GlobiAlias a;
        a.name = normalize_name(entry.at("name").get<std::string>());
        if (auto it = entry.find("sign"); it != entry.end())
            a.sign = sign_from(it->get<std::string>());
        a.primitive = *relationship_kind_from(entry.at("primitive").get<std::string>());
        a.direction = entry.at("direction").get<std::string>() == "Inverse" ? Direction::Inverse : Direction::Forward;
        out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end(), [](const GlobiAlias& a, const GlobiAlias& b) {
        return std::tie(a.primitive, a.name, a.sign) < std::tie(b.primitive, b.name, b.sign);
    });
    return out;
}

} // namespace

const std::vector<GlobiAlias>& list_aliases()
{
    static const std::vector<GlobiAlias> aliases = load_aliases();
    return aliases;
}

std::map<RelationshipKind, std::vector<GlobiAlias>> alias_partition()
{
    std::map<RelationshipKind, std::vector<GlobiAlias>> out;
    for (auto kind : kAllRelationshipKinds)
        out[kind];
    for (const auto& a : list_aliases())
        out[a.primitive].push_back(a);
    return out;
}

Mapping map_interaction(std::string_view name, std::optional<Sign> sign)
{
    const std::string key = normalize_name(name);
    const auto& aliases = list_aliases();

    const GlobiAlias* exact = nullptr;
    const GlobiAlias* unsigned_entry = nullptr;
    bool any_signed = false;
    for (const auto& a : aliases) {
        if (a.name != key)
            continue;
        if (!a.sign)
            unsigned_entry = &a;
        else
            any_signed = true;
        if (sign && a.sign == sign)
            exact = &a;
    }

    const GlobiAlias* hit = exact ? exact : unsigned_entry;
    if (!hit) {
        if (any_signed && !sign)
            throw Error(ErrorCode::MissingSign, "interaction '" + key + "' needs a sign (+ or -)", key);
        throw Error(ErrorCode::UnknownInteraction, "unknown interaction '" + key + "'", key);
    }
    return Mapping{hit->primitive, hit->direction, hit->sign};
}

Suggestion suggest_relationship(const Endpoint& source, const Endpoint& target, std::string_view name,
                                std::optional<Sign> sign, std::string relationship_id)
{
    Mapping m = map_interaction(name, sign);

    Suggestion s;
    s.swapped = m.direction == Direction::Inverse;
    const Endpoint& from = s.swapped ? target : source;
    const Endpoint& to = s.swapped ? source : target;
    if (!endpoint_allowed(m.kind, from.kind, to.kind)) {
        throw Error(ErrorCode::EndpointKindMismatch,
                    std::string(ecoforge::to_string(m.kind)) + " may not connect " +
                        std::string(ecoforge::to_string(from.kind)) + " to " +
                        std::string(ecoforge::to_string(to.kind)),
                    normalize_name(name));
    }

    s.relationship.id = std::move(relationship_id);
    s.relationship.source = from.id;
    s.relationship.target = to.id;
    s.relationship.params = default_params(m.kind);
    if (auto* affects = std::get_if<AffectsParams>(&s.relationship.params); affects && m.sign == Sign::Negative)
        affects->growth_rate_modifier = -affects->growth_rate_modifier;
    return s;
}

Json mapping_to_json(const Mapping& mapping)
{
    Json out = {{"kind", ecoforge::to_string(mapping.kind)}, {"direction", to_string(mapping.direction)}};
    if (mapping.sign)
        out["sign"] = to_string(*mapping.sign);
    return out;
}

Json alias_to_json(const GlobiAlias& alias)
{
    Json out = {{"name", alias.name},
                {"primitive", ecoforge::to_string(alias.primitive)},
                {"direction", to_string(alias.direction)}};
    if (alias.sign)
        out["sign"] = to_string(*alias.sign);
    return out;
}

} // namespace ecoforge::ontology
