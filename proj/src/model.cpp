#include "ecoforge/model.hpp"
#include "ecoforge/data.hpp"
#include "ecoforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace ecoforge {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Syntax: return "Syntax";
    case ErrorCode::Schema: return "Schema";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::UnknownInteraction: return "UnknownInteraction";
    case ErrorCode::MissingSign: return "MissingSign";
    case ErrorCode::EndpointKindMismatch: return "EndpointKindMismatch";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::UnknownTaxon: return "UnknownTaxon";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::UnsupportedUnit: return "UnsupportedUnit";
    case ErrorCode::UnresolvedProperties: return "UnresolvedProperties";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::InvariantBreach: return "InvariantBreach";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

std::string_view to_string(ComponentKind kind)
{
    return kind == ComponentKind::Biotic ? "Biotic" : "Abiotic";
}

std::string_view to_string(RelationshipKind kind)
{
    switch (kind) {
    case RelationshipKind::Consumes: return "Consumes";
    case RelationshipKind::Destroys: return "Destroys";
    case RelationshipKind::Produces: return "Produces";
    case RelationshipKind::Affects: return "Affects";
    case RelationshipKind::BecomesOnDeath: return "BecomesOnDeath";
    }
    return "Unknown";
}

std::optional<ComponentKind> component_kind_from(std::string_view name)
{
    if (name == "Biotic")
        return ComponentKind::Biotic;
    if (name == "Abiotic")
        return ComponentKind::Abiotic;
    return std::nullopt;
}

std::optional<RelationshipKind> relationship_kind_from(std::string_view name)
{
    for (auto kind : kAllRelationshipKinds)
        if (to_string(kind) == name)
            return kind;
    return std::nullopt;
}

RelationshipParams default_params(RelationshipKind kind)
{
    switch (kind) {
    case RelationshipKind::Consumes: return ConsumesParams{};
    case RelationshipKind::Destroys: return DestroysParams{};
    case RelationshipKind::Produces: return ProducesParams{};
    case RelationshipKind::Affects: return AffectsParams{};
    case RelationshipKind::BecomesOnDeath: return BecomesOnDeathParams{};
    }
    return ConsumesParams{};
}

const Component* ConceptualModel::find_component(std::string_view wanted) const
{
    auto it = std::find_if(components.begin(), components.end(),
                           [&](const Component& c) { return c.id == wanted; });
    return it == components.end() ? nullptr : &*it;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what)
{
    throw Error(ErrorCode::Schema, "schema violation at " + (path.empty() ? "/" : path) + ": " + what, path);
}

const Json& require(const Json& obj, const char* key, const std::string& path)
{
    auto it = obj.find(key);
    if (it == obj.end())
        schema_error(path + "/" + key, "missing required field");
    return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& path)
{
    const Json& v = require(obj, key, path);
    if (!v.is_string())
        schema_error(path + "/" + key, "expected string");
    return v.get<std::string>();
}

double require_number(const Json& obj, std::string_view key, const std::string& path)
{
    auto it = obj.find(std::string(key));
    std::string field_path = path + "/" + std::string(key);
    if (it == obj.end())
        schema_error(field_path, "missing required field");
    if (!it->is_number())
        schema_error(field_path, "expected number");
    return it->get<double>();
}

void require_object(const Json& v, const std::string& path)
{
    if (!v.is_object())
        schema_error(path, "expected object");
}

// Unknown keys are kept so nothing in the document is silently dropped.
void stash_unknown(const Json& obj, std::initializer_list<std::string_view> known, const std::string& path,
                   Json& unknown)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            unknown[path + "/" + it.key()] = it.value();
    }
}

template <class Fields, class Props>
void stash_unknown_properties(const Json& obj, const Fields& fields, const std::string& path, Json& unknown,
                              const Props&)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = std::any_of(fields.begin(), fields.end(), [&](const auto& f) { return f.name == it.key(); });
        if (!known)
            unknown[path + "/" + it.key()] = it.value();
    }
}

Component parse_component(const Json& doc, const std::string& path, Json& unknown)
{
    require_object(doc, path);
    Component c;
    c.id = require_string(doc, "id", path);
    if (c.id.empty())
        schema_error(path + "/id", "identifier must be non-empty");
    c.label = doc.contains("label") ? require_string(doc, "label", path) : c.id;
    if (auto it = doc.find("taxon_ref"); it != doc.end() && !it->is_null()) {
        if (!it->is_string())
            schema_error(path + "/taxon_ref", "expected string");
        c.taxon_ref = it->get<std::string>();
    }
    auto kind_name = require_string(doc, "kind", path);
    auto kind = component_kind_from(kind_name);
    if (!kind)
        schema_error(path + "/kind", "unknown component kind '" + kind_name + "'");

    const Json& props = require(doc, "properties", path);
    std::string props_path = path + "/properties";
    require_object(props, props_path);
    if (*kind == ComponentKind::Biotic) {
        BioticProperties p;
        for (const auto& f : kBioticFields)
            p.*f.member = require_number(props, f.name, props_path);
        stash_unknown_properties(props, kBioticFields, props_path, unknown, p);
        c.properties = p;
    } else {
        AbioticProperties p;
        for (const auto& f : kAbioticFields)
            p.*f.member = require_number(props, f.name, props_path);
        stash_unknown_properties(props, kAbioticFields, props_path, unknown, p);
        c.properties = p;
    }
    stash_unknown(doc, {"id", "kind", "label", "taxon_ref", "properties"}, path, unknown);
    return c;
}

RelationshipParams parse_params(RelationshipKind kind, const Json& params, const std::string& path)
{
    require_object(params, path);
    std::vector<std::string_view> allowed;
    RelationshipParams out;
    switch (kind) {
    case RelationshipKind::Consumes:
        out = ConsumesParams{require_number(params, "consumption_rate", path),
                             require_number(params, "interaction_probability", path)};
        allowed = {"consumption_rate", "interaction_probability"};
        break;
    case RelationshipKind::Destroys:
        out = DestroysParams{require_number(params, "destruction_rate", path),
                             require_number(params, "interaction_probability", path)};
        allowed = {"destruction_rate", "interaction_probability"};
        break;
    case RelationshipKind::Produces:
        out = ProducesParams{require_number(params, "production_rate", path)};
        allowed = {"production_rate"};
        break;
    case RelationshipKind::Affects:
        out = AffectsParams{require_number(params, "growth_rate_modifier", path),
                            require_number(params, "interaction_probability", path)};
        allowed = {"growth_rate_modifier", "interaction_probability"};
        break;
    case RelationshipKind::BecomesOnDeath:
        out = BecomesOnDeathParams{require_number(params, "percent_body_mass", path)};
        allowed = {"percent_body_mass"};
        break;
    }
    for (auto it = params.begin(); it != params.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            schema_error(path + "/" + it.key(), "parameter not used by " + std::string(to_string(kind)));
    }
    return out;
}

Relationship parse_relationship(const Json& doc, const std::string& path, Json& unknown)
{
    require_object(doc, path);
    Relationship r;
    r.id = require_string(doc, "id", path);
    if (r.id.empty())
        schema_error(path + "/id", "identifier must be non-empty");
    r.source = require_string(doc, "source", path);
    r.target = require_string(doc, "target", path);
    auto kind_name = require_string(doc, "kind", path);
    auto kind = relationship_kind_from(kind_name);
    if (!kind)
        schema_error(path + "/kind", "unknown relationship kind '" + kind_name + "'");
    r.params = parse_params(*kind, require(doc, "params", path), path + "/params");
    stash_unknown(doc, {"id", "source", "target", "kind", "params"}, path, unknown);
    return r;
}

} // namespace

ConceptualModel model_from_json(const Json& doc, ParseOptions options)
{
    require_object(doc, "");
    const Json& version = require(doc, "version", "");
    if (!version.is_number_integer() || version.get<std::int64_t>() != kModelFormatVersion)
        schema_error("/version", "unsupported version (expected 1)");

    ConceptualModel m;
    if (auto it = doc.find("id"); it != doc.end()) {
        if (!it->is_string())
            schema_error("/id", "expected string");
        m.id = it->get<std::string>();
    }
    m.name = require_string(doc, "name", "");
    if (auto it = doc.find("metadata"); it != doc.end()) {
        require_object(*it, "/metadata");
        m.metadata = *it;
    }

    Json unknown = Json::object();
    const Json& comps = require(doc, "components", "");
    if (!comps.is_array())
        schema_error("/components", "expected array");
    for (std::size_t i = 0; i < comps.size(); ++i)
        m.components.push_back(parse_component(comps[i], "/components/" + std::to_string(i), unknown));

    const Json& rels = require(doc, "relationships", "");
    if (!rels.is_array())
        schema_error("/relationships", "expected array");
    for (std::size_t i = 0; i < rels.size(); ++i) {
        std::string path = "/relationships/" + std::to_string(i);
        m.relationships.push_back(parse_relationship(rels[i], path, unknown));
        if (options.check_references) {
            const auto& r = m.relationships.back();
            for (const auto& [field, ref] : {std::pair{"source", &r.source}, std::pair{"target", &r.target}}) {
                if (!m.find_component(*ref))
                    schema_error(path + "/" + field, "relationship references missing component '" + *ref + "'");
            }
        }
    }

    stash_unknown(doc, {"version", "id", "name", "metadata", "components", "relationships"}, "", unknown);
    if (!unknown.empty()) {
        Json& bucket = m.metadata["unknown_fields"];
        if (!bucket.is_object())
            bucket = Json::object();
        for (auto it = unknown.begin(); it != unknown.end(); ++it)
            bucket[it.key()] = it.value();
    }
    return m;
}

ConceptualModel parse_model(std::string_view text, ParseOptions options)
{
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Syntax, "syntax error at byte " + std::to_string(e.byte) + ": " + e.what(),
                    "byte " + std::to_string(e.byte));
    }
    return model_from_json(doc, options);
}

// ---------------------------------------------------------------------------
// serialization

Json properties_to_json(const BioticProperties& props)
{
    Json out = Json::object();
    for (const auto& f : kBioticFields)
        out[std::string(f.name)] = props.*f.member;
    return out;
}

Json properties_to_json(const AbioticProperties& props)
{
    Json out = Json::object();
    for (const auto& f : kAbioticFields)
        out[std::string(f.name)] = props.*f.member;
    return out;
}

namespace {

Json params_to_json(const RelationshipParams& params)
{
    return std::visit(
        [](const auto& p) -> Json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConsumesParams>)
                return {{"consumption_rate", p.consumption_rate}, {"interaction_probability", p.interaction_probability}};
            else if constexpr (std::is_same_v<T, DestroysParams>)
                return {{"destruction_rate", p.destruction_rate}, {"interaction_probability", p.interaction_probability}};
            else if constexpr (std::is_same_v<T, ProducesParams>)
                return {{"production_rate", p.production_rate}};
            else if constexpr (std::is_same_v<T, AffectsParams>)
                return {{"growth_rate_modifier", p.growth_rate_modifier},
                        {"interaction_probability", p.interaction_probability}};
            else
                return {{"percent_body_mass", p.percent_body_mass}};
        },
        params);
}

} // namespace

Json model_to_json(const ConceptualModel& model)
{
    Json doc = Json::object();
    doc["version"] = kModelFormatVersion;
    if (!model.id.empty())
        doc["id"] = model.id;
    doc["name"] = model.name;
    if (!model.metadata.empty())
        doc["metadata"] = model.metadata;

    Json comps = Json::array();
    for (const auto& c : model.components) {
        Json jc = {{"id", c.id}, {"kind", to_string(c.kind())}, {"label", c.label}};
        if (c.taxon_ref)
            jc["taxon_ref"] = *c.taxon_ref;
        jc["properties"] = std::visit([](const auto& p) { return properties_to_json(p); }, c.properties);
        comps.push_back(std::move(jc));
    }
    doc["components"] = std::move(comps);

    Json rels = Json::array();
    for (const auto& r : model.relationships) {
        rels.push_back({{"id", r.id},
                        {"source", r.source},
                        {"target", r.target},
                        {"kind", to_string(r.kind())},
                        {"params", params_to_json(r.params)}});
    }
    doc["relationships"] = std::move(rels);
    return doc;
}

std::string serialize_model(const ConceptualModel& model)
{
    return canonical_dump(model_to_json(model));
}

// ---------------------------------------------------------------------------
// defaults

namespace {

template <class Props, class Fields>
Props props_from_table(const Json& table, const Fields& fields)
{
    Props p;
    for (const auto& f : fields)
        p.*f.member = table.at(std::string(f.name)).template get<double>();
    return p;
}

} // namespace

BioticProperties default_biotic_properties()
{
    static const BioticProperties props =
        props_from_table<BioticProperties>(data::table("defaults.json").at("biotic"), kBioticFields);
    return props;
}

AbioticProperties default_abiotic_properties()
{
    static const AbioticProperties props =
        props_from_table<AbioticProperties>(data::table("defaults.json").at("abiotic"), kAbioticFields);
    return props;
}

ComponentProperties default_properties(ComponentKind kind)
{
    if (kind == ComponentKind::Biotic)
        return default_biotic_properties();
    return default_abiotic_properties();
}

// ---------------------------------------------------------------------------
// validation

bool endpoint_allowed(RelationshipKind kind, ComponentKind source, ComponentKind target)
{
    using CK = ComponentKind;
    const bool bb = source == CK::Biotic && target == CK::Biotic;
    const bool ba = source == CK::Biotic && target == CK::Abiotic;
    const bool ab = source == CK::Abiotic && target == CK::Biotic;
    switch (kind) {
    case RelationshipKind::Consumes: return bb || ba;
    case RelationshipKind::Destroys: return bb || ab || ba;
    case RelationshipKind::Produces: return ba || bb;
    case RelationshipKind::Affects: return true;
    case RelationshipKind::BecomesOnDeath: return ba || bb;
    }
    return false;
}

namespace {

struct Bound {
    double lo;
    double hi;
    bool lo_open;
    bool hi_open;
    bool integral;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Indexed like kBioticFields.
constexpr std::array<Bound, 13> kBioticBounds = {{
    {0, kInf, true, false, false},   // lifespan > 0
    {0, kInf, false, false, false},  // reproductive_maturity >= 0
    {0, kInf, true, false, false},   // reproductive_interval > 0
    {0, kInf, false, false, false},  // offspring_count >= 0
    {0, kInf, false, false, true},   // starting_population
    {0, kInf, false, false, true},   // minimum_population
    {0, kInf, true, false, false},   // body_mass > 0
    {0, kInf, true, false, false},   // carbon_biomass > 0
    {0, kInf, false, false, false},  // respiratory_rate
    {0, kInf, false, false, false},  // photosynthesis_rate
    {0, 1, false, false, false},     // assimilation_efficiency
    {0, 360, false, true, false},    // move_direction
    {0, kInf, false, false, false},  // move_velocity
}};

bool in_bound(double v, const Bound& b)
{
    if (!std::isfinite(v))
        return false;
    if (b.lo_open ? v <= b.lo : v < b.lo)
        return false;
    if (b.hi_open ? v >= b.hi : v > b.hi)
        return false;
    if (b.integral && std::floor(v) != v)
        return false;
    return true;
}

std::string describe(const Bound& b)
{
    std::string s = b.lo_open ? "(" : "[";
    s += format_number(b.lo) + ", ";
    s += std::isinf(b.hi) ? "inf" : format_number(b.hi);
    s += b.hi_open ? ")" : "]";
    if (b.integral)
        s += ", integral";
    return s;
}

class Collector {
public:
    void error(std::string code, std::string subject, std::string field, std::string message)
    {
        report_.errors.push_back({std::move(code), std::move(message), std::move(subject), std::move(field)});
    }
    void warning(std::string code, std::string subject, std::string field, std::string message)
    {
        report_.warnings.push_back({std::move(code), std::move(message), std::move(subject), std::move(field)});
    }
    ValidationReport finish()
    {
        auto order = [](const Issue& a, const Issue& b) {
            return std::tie(a.subject, a.code, a.field, a.message) < std::tie(b.subject, b.code, b.field, b.message);
        };
        std::sort(report_.errors.begin(), report_.errors.end(), order);
        std::sort(report_.warnings.begin(), report_.warnings.end(), order);
        return std::move(report_);
    }

private:
    ValidationReport report_;
};

void check_param(Collector& out, const Relationship& r, const char* field, double v, double lo, double hi)
{
    if (!std::isfinite(v) || v < lo || v > hi) {
        out.error("PARAM_RANGE", r.id, field,
                  std::string(field) + " = " + format_number(v) + " outside [" + format_number(lo) + ", " +
                      (std::isinf(hi) ? std::string("inf") : format_number(hi)) + "]");
    }
}

} // namespace

ValidationReport validate_model(const ConceptualModel& model)
{
    Collector out;

    std::set<std::string> seen;
    for (const auto& c : model.components) {
        if (!seen.insert(c.id).second)
            out.error("DUPLICATE_ID", c.id, "id", "component id '" + c.id + "' is not unique");
    }
    std::set<std::string> seen_rel;
    for (const auto& r : model.relationships) {
        if (!seen_rel.insert(r.id).second || seen.count(r.id))
            out.error("DUPLICATE_ID", r.id, "id", "relationship id '" + r.id + "' is not unique");
    }

    for (const auto& c : model.components) {
        if (c.kind() == ComponentKind::Biotic) {
            const auto& p = c.biotic();
            for (std::size_t i = 0; i < kBioticFields.size(); ++i) {
                const auto& f = kBioticFields[i];
                double v = p.*f.member;
                if (!in_bound(v, kBioticBounds[i])) {
                    out.error("PROP_RANGE", c.id, std::string(f.name),
                              std::string(f.name) + " = " + format_number(v) + " outside " +
                                  describe(kBioticBounds[i]));
                }
            }
            if (std::isfinite(p.reproductive_maturity) && std::isfinite(p.lifespan) &&
                p.reproductive_maturity >= p.lifespan) {
                out.error("PROP_ORDER", c.id, "reproductive_maturity",
                          "reproductive_maturity must be less than lifespan");
            }
            if (p.starting_population == 0)
                out.warning("STARTS_EXTINCT", c.id, "starting_population", "population starts with no agents");
            if (p.minimum_population > p.starting_population)
                out.warning("REFUGE_ABOVE_START", c.id, "minimum_population",
                            "minimum_population exceeds starting_population");
        } else {
            const auto& p = c.abiotic();
            for (const auto& f : kAbioticFields) {
                double v = p.*f.member;
                bool bad = !std::isfinite(v) || (f.member != &AbioticProperties::growth_rate && v < 0);
                if (bad)
                    out.error("PROP_RANGE", c.id, std::string(f.name),
                              std::string(f.name) + " = " + format_number(v) + " out of range");
            }
            if (p.amount < p.minimum_amount)
                out.error("PROP_ORDER", c.id, "amount", "amount must be at least minimum_amount");
        }
    }

    for (const auto& r : model.relationships) {
        const Component* src = model.find_component(r.source);
        const Component* tgt = model.find_component(r.target);
        if (!src)
            out.error("REL_ENDPOINT_MISSING", r.id, "source", "source '" + r.source + "' is not a component");
        if (!tgt)
            out.error("REL_ENDPOINT_MISSING", r.id, "target", "target '" + r.target + "' is not a component");
        if (r.source == r.target)
            out.error("REL_SELF_LOOP", r.id, "target", "relationship connects '" + r.source + "' to itself");
        if (src && tgt && !endpoint_allowed(r.kind(), src->kind(), tgt->kind())) {
            out.error("REL_ENDPOINT_KIND", r.id, "kind",
                      std::string(to_string(r.kind())) + " may not connect " + std::string(to_string(src->kind())) +
                          " to " + std::string(to_string(tgt->kind())));
        }

        const bool biotic_target = tgt && tgt->kind() == ComponentKind::Biotic;
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, ConsumesParams>) {
                    // Against an organism the rate is the fraction of its carbon taken per bite.
                    check_param(out, r, "consumption_rate", p.consumption_rate, 0, biotic_target ? 1.0 : kInf);
                    check_param(out, r, "interaction_probability", p.interaction_probability, 0, 1);
                } else if constexpr (std::is_same_v<T, DestroysParams>) {
                    check_param(out, r, "destruction_rate", p.destruction_rate, 0, 1);
                    check_param(out, r, "interaction_probability", p.interaction_probability, 0, 1);
                } else if constexpr (std::is_same_v<T, ProducesParams>) {
                    check_param(out, r, "production_rate", p.production_rate, 0, kInf);
                } else if constexpr (std::is_same_v<T, AffectsParams>) {
                    check_param(out, r, "growth_rate_modifier", p.growth_rate_modifier, -1, kInf);
                    check_param(out, r, "interaction_probability", p.interaction_probability, 0, 1);
                } else {
                    check_param(out, r, "percent_body_mass", p.percent_body_mass, 0, 1);
                }
            },
            r.params);
    }

    return out.finish();
}

Json report_to_json(const ValidationReport& report)
{
    auto issues = [](const std::vector<Issue>& list) {
        Json arr = Json::array();
        for (const auto& i : list) {
            Json j = {{"code", i.code}, {"message", i.message}, {"subject", i.subject}};
            if (!i.field.empty())
                j["field"] = i.field;
            arr.push_back(std::move(j));
        }
        return arr;
    };
    return {{"errors", issues(report.errors)}, {"warnings", issues(report.warnings)}, {"ok", report.ok()}};
}

} // namespace ecoforge
