#pragma once

#include "ecoforge/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecoforge::ontology {

enum class Sign { Positive, Negative };
enum class Direction { Forward, Inverse };

std::string_view to_string(Sign sign);
std::string_view to_string(Direction direction);
std::optional<Sign> sign_from(std::string_view text); // "+", "-", "positive", "negative"

struct GlobiAlias {
    std::string name;
    std::optional<Sign> sign;
    RelationshipKind primitive;
    Direction direction;

    friend bool operator==(const GlobiAlias&, const GlobiAlias&) = default;
};

struct Mapping {
    RelationshipKind kind;
    Direction direction;
    std::optional<Sign> sign; // set when the alias carries a sign

    friend bool operator==(const Mapping&, const Mapping&) = default;
};

// Lowercase, trim, collapse internal whitespace, drop hyphens and trailing periods.
std::string normalize_name(std::string_view name);

Mapping map_interaction(std::string_view name, std::optional<Sign> sign = std::nullopt);

// Ordered by (primitive, name, sign).
const std::vector<GlobiAlias>& list_aliases();

// All five primitive kinds as keys; BecomesOnDeath has no aliases.
std::map<RelationshipKind, std::vector<GlobiAlias>> alias_partition();

struct Endpoint {
    std::string id;
    ComponentKind kind;
};

struct Suggestion {
    Relationship relationship; // default params, endpoints already oriented
    bool swapped = false;
};

Suggestion suggest_relationship(const Endpoint& source, const Endpoint& target, std::string_view name,
                                std::optional<Sign> sign = std::nullopt, std::string relationship_id = "r1");

Json mapping_to_json(const Mapping& mapping);
Json alias_to_json(const GlobiAlias& alias);

} // namespace ecoforge::ontology
