#pragma once

#include "ecoforge/json_canon.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ecoforge {

enum class ComponentKind { Biotic, Abiotic };

enum class RelationshipKind { Consumes, Destroys, Produces, Affects, BecomesOnDeath };

std::string_view to_string(ComponentKind kind);
std::string_view to_string(RelationshipKind kind);
std::optional<ComponentKind> component_kind_from(std::string_view name);
std::optional<RelationshipKind> relationship_kind_from(std::string_view name);

inline constexpr std::array<RelationshipKind, 5> kAllRelationshipKinds = {
    RelationshipKind::Consumes, RelationshipKind::Destroys, RelationshipKind::Produces,
    RelationshipKind::Affects, RelationshipKind::BecomesOnDeath};

// Units: months, kg, kg-carbon per month, grid cells per month.
struct BioticProperties {
    double lifespan = 0;
    double reproductive_maturity = 0;
    double reproductive_interval = 0;
    double offspring_count = 0;
    double starting_population = 0;
    double minimum_population = 0;
    double body_mass = 0;
    double carbon_biomass = 0;
    double respiratory_rate = 0;
    double photosynthesis_rate = 0;
    double assimilation_efficiency = 0;
    double move_direction = 0;
    double move_velocity = 0;

    friend bool operator==(const BioticProperties&, const BioticProperties&) = default;
};

struct AbioticProperties {
    double amount = 0;
    double minimum_amount = 0;
    double growth_rate = 0;

    friend bool operator==(const AbioticProperties&, const AbioticProperties&) = default;
};

// Name/member table used by parsing, serialization, validation and derivation,
// so the field lists live in one place.
struct BioticField {
    std::string_view name;
    double BioticProperties::*member;
};
struct AbioticField {
    std::string_view name;
    double AbioticProperties::*member;
};

inline constexpr std::array<BioticField, 13> kBioticFields = {{
    {"lifespan", &BioticProperties::lifespan},
    {"reproductive_maturity", &BioticProperties::reproductive_maturity},
    {"reproductive_interval", &BioticProperties::reproductive_interval},
    {"offspring_count", &BioticProperties::offspring_count},
    {"starting_population", &BioticProperties::starting_population},
    {"minimum_population", &BioticProperties::minimum_population},
    {"body_mass", &BioticProperties::body_mass},
    {"carbon_biomass", &BioticProperties::carbon_biomass},
    {"respiratory_rate", &BioticProperties::respiratory_rate},
    {"photosynthesis_rate", &BioticProperties::photosynthesis_rate},
    {"assimilation_efficiency", &BioticProperties::assimilation_efficiency},
    {"move_direction", &BioticProperties::move_direction},
    {"move_velocity", &BioticProperties::move_velocity},
}};

inline constexpr std::array<AbioticField, 3> kAbioticFields = {{
    {"amount", &AbioticProperties::amount},
    {"minimum_amount", &AbioticProperties::minimum_amount},
    {"growth_rate", &AbioticProperties::growth_rate},
}};

using ComponentProperties = std::variant<BioticProperties, AbioticProperties>;

struct Component {
    std::string id;
    std::string label;
    std::optional<std::string> taxon_ref;
    ComponentProperties properties;

    // The kind is the active properties alternative; there is no separate tag to disagree with it.
    ComponentKind kind() const noexcept
    {
        return std::holds_alternative<BioticProperties>(properties) ? ComponentKind::Biotic
                                                                    : ComponentKind::Abiotic;
    }
    const BioticProperties& biotic() const { return std::get<BioticProperties>(properties); }
    const AbioticProperties& abiotic() const { return std::get<AbioticProperties>(properties); }

    friend bool operator==(const Component&, const Component&) = default;
};

struct ConsumesParams {
    double consumption_rate = 1.0;
    double interaction_probability = 0.5;
    friend bool operator==(const ConsumesParams&, const ConsumesParams&) = default;
};
struct DestroysParams {
    double destruction_rate = 1.0;
    double interaction_probability = 0.5;
    friend bool operator==(const DestroysParams&, const DestroysParams&) = default;
};
struct ProducesParams {
    double production_rate = 1.0;
    friend bool operator==(const ProducesParams&, const ProducesParams&) = default;
};
struct AffectsParams {
    double growth_rate_modifier = 0.1;
    double interaction_probability = 0.5;
    friend bool operator==(const AffectsParams&, const AffectsParams&) = default;
};
struct BecomesOnDeathParams {
    double percent_body_mass = 0.5;
    friend bool operator==(const BecomesOnDeathParams&, const BecomesOnDeathParams&) = default;
};

// Alternative order matches RelationshipKind.
using RelationshipParams =
    std::variant<ConsumesParams, DestroysParams, ProducesParams, AffectsParams, BecomesOnDeathParams>;

RelationshipParams default_params(RelationshipKind kind);

struct Relationship {
    std::string id;
    std::string source;
    std::string target;
    RelationshipParams params;

    RelationshipKind kind() const noexcept { return static_cast<RelationshipKind>(params.index()); }

    friend bool operator==(const Relationship&, const Relationship&) = default;
};

struct ConceptualModel {
    std::string id;
    std::string name;
    std::vector<Component> components;
    std::vector<Relationship> relationships;
    Json metadata = Json::object();

    const Component* find_component(std::string_view id) const;

    friend bool operator==(const ConceptualModel&, const ConceptualModel&) = default;
};

inline constexpr int kModelFormatVersion = 1;

struct ParseOptions {
    // Reject relationships whose endpoints name no component. The service turns
    // this off so dangling edges surface as validation findings instead.
    bool check_references = true;
};

ConceptualModel parse_model(std::string_view text, ParseOptions options = {});
ConceptualModel model_from_json(const Json& doc, ParseOptions options = {});
Json model_to_json(const ConceptualModel& model);
std::string serialize_model(const ConceptualModel& model);

struct Issue {
    std::string code;
    std::string message;
    std::string subject;
    std::string field;

    friend bool operator==(const Issue&, const Issue&) = default;
};

struct ValidationReport {
    std::vector<Issue> errors;
    std::vector<Issue> warnings;

    bool ok() const noexcept { return errors.empty(); }
};

Json report_to_json(const ValidationReport& report);

// Which (source kind, target kind) pairs each relationship kind may connect.
bool endpoint_allowed(RelationshipKind kind, ComponentKind source, ComponentKind target);

ValidationReport validate_model(const ConceptualModel& model);

BioticProperties default_biotic_properties();
AbioticProperties default_abiotic_properties();
ComponentProperties default_properties(ComponentKind kind);

Json properties_to_json(const BioticProperties& props);
Json properties_to_json(const AbioticProperties& props);

} // namespace ecoforge
