#include "ecoforge/traits.hpp"
#include "ecoforge/data.hpp"
#include "ecoforge/error.hpp"
#include "ecoforge/units.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ecoforge::traits {

std::string_view to_string(Method method)
{
    switch (method) {
    case Method::Direct: return "Direct";
    case Method::AncestryEstimate: return "AncestryEstimate";
    case Method::Default: return "Default";
    }
    return "Default";
}

const DerivationEntry* DerivationReport::find(std::string_view parameter) const
{
    for (const auto& e : entries)
        if (e.parameter == parameter)
            return &e;
    return nullptr;
}

Json report_to_json(const DerivationReport& report)
{
    Json entries = Json::array();
    for (const auto& e : report.entries) {
        Json inputs = Json::array();
        for (const auto& in : e.inputs) {
            inputs.push_back({{"record", in.record_index},
                              {"predicate", in.record.predicate},
                              {"value", in.record.value},
                              {"unit", in.record.unit},
                              {"source", in.record.source},
                              {"normalized", in.normalized}});
        }
        entries.push_back({{"parameter", e.parameter},
                           {"method", to_string(e.method)},
                           {"inputs", std::move(inputs)},
                           {"formula", e.formula},
                           {"value", e.value}});
    }
    return {{"entries", std::move(entries)}};
}

// ---------------------------------------------------------------------------
// estimation tables

const CarbonEstimationTable& CarbonEstimationTable::shipped()
{
    static const CarbonEstimationTable table = [] {
        const Json& carbon = data::table("estimation.json").at("carbon_fraction");
        CarbonEstimationTable t;
        for (const auto& c : carbon.at("classes"))
            t.constants.emplace_back(c.at("taxon").get<std::string>(), c.at("value").get<double>());
        t.default_constant = carbon.at("default").get<double>();
        return t;
    }();
    return table;
}

double CarbonEstimationTable::constant_for(const std::vector<std::string>& ancestry) const
{
    for (const auto& name : ancestry)
        for (const auto& [taxon, value] : constants)
            if (name == taxon)
                return value;
    return default_constant;
}

double estimate_carbon_biomass(double body_mass, const std::vector<std::string>& ancestry)
{
    return CarbonEstimationTable::shipped().constant_for(ancestry) * body_mass;
}

namespace {

struct AssimilationClass {
    std::string name;
    double value;
    std::vector<std::string> taxa;
};

struct AssimilationTable {
    std::vector<AssimilationClass> classes;
    double fallback;
};

const AssimilationTable& assimilation_table()
{
    static const AssimilationTable table = [] {
        const Json& j = data::table("estimation.json").at("assimilation_efficiency");
        AssimilationTable t;
        for (const auto& c : j.at("classes"))
            t.classes.push_back({c.at("name").get<std::string>(), c.at("value").get<double>(),
                                 c.at("taxa").get<std::vector<std::string>>()});
        t.fallback = j.at("default").get<double>();
        return t;
    }();
    return table;
}

double joules_per_kg_carbon()
{
    static const double value = data::table("estimation.json").at("joules_per_kg_carbon").get<double>();
    return value;
}

std::string normalize_predicate(std::string_view s)
{
    std::string out;
    bool space = false;
    for (char raw : s) {
        auto c = static_cast<unsigned char>(raw);
        if (std::isspace(c) || c == '-' || c == '_') {
            space = !out.empty();
            continue;
        }
        if (space)
            out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

const std::map<std::string, std::vector<std::string>, std::less<>>& predicate_table()
{
    static const std::map<std::string, std::vector<std::string>, std::less<>> table = {
        {"lifespan", {"life span", "total life span"}},
        {"reproductive_maturity",
         {"age at first birth", "age at first reproduction", "age at maturity", "onset of fertility",
          "egg laying begins"}},
        {"reproductive_interval", {"inter-birth interval"}},
        {"offspring_count", {"offspring", "litters per year"}},
        {"body_mass", {"body mass"}},
        {"carbon_biomass", {"carbon biomass"}},
        {"respiratory_rate", {"respiratory rate"}},
        {"photosynthesis_rate", {"photosynthetic rate"}},
    };
    return table;
}

const std::vector<std::string> kBasalMetabolicRate = {"basal metabolic rate"};
const std::vector<std::string> kNetCarbonFixation = {"net carbon fixation rate"};

bool acceptable(std::string_view parameter, double v)
{
    if (!std::isfinite(v))
        return false;
    if (parameter == "lifespan" || parameter == "reproductive_interval" || parameter == "body_mass" ||
        parameter == "carbon_biomass")
        return v > 0;
    return v >= 0;
}

std::vector<DerivationInput> gather(const std::vector<TraitRecord>& records, const std::vector<std::string>& predicates,
                                    std::string_view target, std::string_view parameter)
{
    std::vector<DerivationInput> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        auto p = normalize_predicate(r.predicate);
        bool wanted = std::any_of(predicates.begin(), predicates.end(),
                                  [&](const std::string& a) { return normalize_predicate(a) == p; });
        if (!wanted)
            continue;
        if (!units::is_supported(r.unit))
            continue;
        double v;
        try {
            v = units::normalize_unit(r.value, r.unit, target);
        } catch (const Error&) {
            continue;
        }
        if (!acceptable(parameter, v))
            continue;
        out.push_back({i, r, v});
    }
    return out;
}

struct Mean {
    double value;
    std::string formula;
};

Mean mean_of(const std::vector<double>& values)
{
    double sum = 0;
    std::string terms;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        if (i)
            terms += " + ";
        terms += format_number(values[i]);
    }
    double n = static_cast<double>(values.size());
    return {sum / n, "(" + terms + ") / " + format_number(n)};
}

Mean mean_of(const std::vector<DerivationInput>& inputs)
{
    std::vector<double> values;
    for (const auto& in : inputs)
        values.push_back(in.normalized);
    return mean_of(values);
}

DerivationEntry default_entry(std::string_view parameter, double value)
{
    return {std::string(parameter), Method::Default, {}, format_number(value), value};
}

} // namespace

const std::vector<std::string>& predicates_for(std::string_view parameter)
{
    static const std::vector<std::string> none;
    const auto& table = predicate_table();
    auto it = table.find(parameter);
    return it == table.end() ? none : it->second;
}

std::pair<BioticProperties, DerivationReport> derive_parameters(const std::vector<TraitRecord>& records,
                                                                const std::vector<std::string>& ancestry,
                                                                const BioticProperties& defaults)
{
    std::map<std::string, DerivationEntry, std::less<>> entries;

    auto direct = [&](std::string_view parameter, std::string_view target) -> bool {
        auto inputs = gather(records, predicates_for(parameter), target, parameter);
        if (inputs.empty())
            return false;
        auto m = mean_of(inputs);
        entries[std::string(parameter)] = {std::string(parameter), Method::Direct, std::move(inputs), m.formula,
                                           m.value};
        return true;
    };

    direct("lifespan", "months");
    direct("reproductive_maturity", "months");
    direct("reproductive_interval", "months");
    direct("offspring_count", "count");
    const bool have_body_mass = direct("body_mass", "kg");
    const double body_mass = have_body_mass ? entries["body_mass"].value : defaults.body_mass;

    if (!direct("carbon_biomass", "kg") && (have_body_mass || !ancestry.empty())) {
        const double k = CarbonEstimationTable::shipped().constant_for(ancestry);
        std::vector<DerivationInput> inputs;
        if (have_body_mass)
            inputs = entries["body_mass"].inputs;
        entries["carbon_biomass"] = {"carbon_biomass", Method::AncestryEstimate, std::move(inputs),
                                     format_number(k) + " * " + format_number(body_mass), k * body_mass};
    }

    if (!direct("respiratory_rate", "kg/month")) {
        // Basal metabolic rate in watts (whole organism) or W/kg (scaled by body mass),
        // respired energy turned into carbon through the shipped joules-per-kg constant.
        std::vector<DerivationInput> whole, specific;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            if (normalize_predicate(r.predicate) != kBasalMetabolicRate[0] || !std::isfinite(r.value) || r.value < 0)
                continue;
            if (r.unit == "W")
                whole.push_back({i, r, r.value});
            else if (r.unit == "W/kg")
                specific.push_back({i, r, r.value});
        }
        const double secs = units::kSecondsPerMonth;
        const double jpk = joules_per_kg_carbon();
        if (!whole.empty()) {
            auto m = mean_of(whole);
            double v = m.value * secs / jpk;
            entries["respiratory_rate"] = {"respiratory_rate", Method::AncestryEstimate, std::move(whole),
                                           "(" + m.formula + ") * " + format_number(secs) + " / " + format_number(jpk),
                                           v};
        } else if (!specific.empty()) {
            auto m = mean_of(specific);
            double v = m.value * body_mass * secs / jpk;
            entries["respiratory_rate"] = {"respiratory_rate", Method::AncestryEstimate, std::move(specific),
                                           "(" + m.formula + ") * " + format_number(body_mass) + " * " +
                                               format_number(secs) + " / " + format_number(jpk),
                                           v};
        }
    }

    if (!direct("photosynthesis_rate", "kg/m2/month")) {
        auto inputs = gather(records, kNetCarbonFixation, "kg/m2/month", "photosynthesis_rate");
        if (!inputs.empty()) {
            auto m = mean_of(inputs);
            entries["photosynthesis_rate"] = {"photosynthesis_rate", Method::AncestryEstimate, std::move(inputs),
                                              m.formula, m.value};
        }
    }

    for (const auto& cls : assimilation_table().classes) {
        bool hit = std::any_of(ancestry.begin(), ancestry.end(), [&](const std::string& a) {
            return std::find(cls.taxa.begin(), cls.taxa.end(), a) != cls.taxa.end();
        });
        if (hit) {
            entries["assimilation_efficiency"] = {"assimilation_efficiency", Method::AncestryEstimate, {},
                                                  format_number(cls.value), cls.value};
            break;
        }
    }

    BioticProperties props = defaults;
    DerivationReport report;
    for (const auto& f : kBioticFields) {
        auto it = entries.find(f.name);
        DerivationEntry e = it != entries.end() ? it->second : default_entry(f.name, defaults.*f.member);
        props.*f.member = e.value;
        report.entries.push_back(std::move(e));
    }

    // Maturity must precede death. A defaulted lifespan stretches to twice the
    // maturity; a measured lifespan wins and maturity is halved from it.
    if (props.reproductive_maturity >= props.lifespan) {
        auto& life = report.entries[0];
        auto& maturity = report.entries[1];
        if (life.method == Method::Default) {
            life.value = 2 * props.reproductive_maturity;
            life.formula = "2 * " + format_number(props.reproductive_maturity);
            props.lifespan = life.value;
        } else {
            maturity.method = Method::Default;
            maturity.inputs.clear();
            maturity.value = props.lifespan / 2;
            maturity.formula = format_number(props.lifespan) + " / 2";
            props.reproductive_maturity = maturity.value;
        }
    }
    return {props, std::move(report)};
}

// ---------------------------------------------------------------------------
// backends

namespace {

std::string normalize_query(std::string_view s)
{
    std::string out;
    bool space = false;
    for (char raw : s) {
        auto c = static_cast<unsigned char>(raw);
        if (std::isspace(c) || c == '-' || c == '_') {
            space = !out.empty();
            continue;
        }
        if (space)
            out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

bool starts_with(const std::string& s, const std::string& prefix)
{
    return s.compare(0, prefix.size(), prefix) == 0;
}

TraitRecord record_from_json(const Json& j, const std::string& taxon_id)
{
    TraitRecord r;
    r.taxon_id = taxon_id;
    r.predicate = j.at("predicate").get<std::string>();
    r.value = j.at("value").get<double>();
    r.unit = j.value("unit", "");
    r.source = j.value("source", "");
    return r;
}

void sort_records(std::vector<TraitRecord>& records)
{
    std::stable_sort(records.begin(), records.end(), [](const TraitRecord& a, const TraitRecord& b) {
        return std::tie(a.predicate, a.source) < std::tie(b.predicate, b.source);
    });
}

} // namespace

FixtureBackend::FixtureBackend(const std::string& directory)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(directory, ec))
        throw Error(ErrorCode::Io, "fixture directory not found: " + directory, directory);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(directory))
        if (e.path().extension() == ".json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        std::ifstream in(path);
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::Syntax, "bad fixture " + path.string() + ": " + e.what(), path.string());
        }
        Entry entry;
        entry.match.taxon_id = j.at("taxon_id").get<std::string>();
        entry.match.canonical_name = j.at("canonical_name").get<std::string>();
        entry.match.common_names = j.value("common_names", std::vector<std::string>{});
        entry.match.ancestry = j.value("ancestry", std::vector<std::string>{});
        for (const auto& r : j.value("records", Json::array()))
            entry.records.push_back(record_from_json(r, entry.match.taxon_id));
        sort_records(entry.records);
        taxa_.push_back(std::move(entry));
    }
    std::sort(taxa_.begin(), taxa_.end(),
              [](const Entry& a, const Entry& b) { return a.match.taxon_id < b.match.taxon_id; });
}

std::vector<TaxonMatch> FixtureBackend::search_taxa(std::string_view query)
{
    const std::string q = normalize_query(query);
    if (q.empty())
        throw Error(ErrorCode::EmptyQuery, "species query is empty");

    std::vector<std::pair<int, const TaxonMatch*>> ranked;
    for (const auto& e : taxa_) {
        const auto& m = e.match;
        const std::string sci = normalize_query(m.canonical_name);
        std::vector<std::string> common;
        for (const auto& c : m.common_names)
            common.push_back(normalize_query(c));

        int tier = -1;
        if (sci == q)
            tier = 0;
        else if (std::find(common.begin(), common.end(), q) != common.end())
            tier = 1;
        else if (starts_with(sci, q) || std::any_of(common.begin(), common.end(), [&](auto& c) { return starts_with(c, q); }))
            tier = 2;
        else if (sci.find(q) != std::string::npos ||
                 std::any_of(common.begin(), common.end(), [&](auto& c) { return c.find(q) != std::string::npos; }))
            tier = 3;
        if (tier >= 0)
            ranked.emplace_back(tier, &m);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first, a.second->canonical_name, a.second->taxon_id) <
               std::tie(b.first, b.second->canonical_name, b.second->taxon_id);
    });
    std::vector<TaxonMatch> out;
    for (const auto& [tier, m] : ranked)
        out.push_back(*m);
    return out;
}

const FixtureBackend::Entry& FixtureBackend::entry(const std::string& taxon_id) const
{
    auto it = std::lower_bound(taxa_.begin(), taxa_.end(), taxon_id,
                               [](const Entry& e, const std::string& id) { return e.match.taxon_id < id; });
    if (it == taxa_.end() || it->match.taxon_id != taxon_id)
        throw Error(ErrorCode::UnknownTaxon, "unknown taxon '" + taxon_id + "'", taxon_id);
    return *it;
}

TaxonMatch FixtureBackend::taxon(const std::string& taxon_id)
{
    return entry(taxon_id).match;
}

std::vector<TraitRecord> FixtureBackend::fetch_traits(const std::string& taxon_id)
{
    return entry(taxon_id).records;
}

std::string default_fixture_dir()
{
    return data::share_dir() + "/taxa";
}

std::unique_ptr<TraitBackend> make_backend(std::string_view spec)
{
    if (spec.rfind("fixtures:", 0) == 0)
        return std::make_unique<FixtureBackend>(std::string(spec.substr(9)));
    if (spec.rfind("live:", 0) == 0)
        return std::make_unique<LiveBackend>(std::string(spec.substr(5)));
    throw Error(ErrorCode::Io, "trait backend must be fixtures:<dir> or live:<base-url>, got '" + std::string(spec) + "'",
                std::string(spec));
}

std::unique_ptr<TraitBackend> backend_from_env()
{
    if (const char* env = std::getenv("ECOFORGE_TRAIT_BACKEND"); env && *env)
        return make_backend(env);
    return std::make_unique<FixtureBackend>(default_fixture_dir());
}

Json taxon_to_json(const TaxonMatch& match)
{
    return {{"taxon_id", match.taxon_id},
            {"canonical_name", match.canonical_name},
            {"common_names", match.common_names},
            {"ancestry", match.ancestry}};
}

SpeciesParameters derive_for_taxon(TraitBackend& backend, const std::string& taxon_id)
{
    SpeciesParameters out;
    out.taxon = backend.taxon(taxon_id);
    auto records = backend.fetch_traits(taxon_id);
    auto [props, report] = derive_parameters(records, out.taxon.ancestry, default_biotic_properties());
    out.properties = props;
    out.report = std::move(report);
    return out;
}

Json species_parameters_to_json(const SpeciesParameters& species)
{
    return {{"taxon", taxon_to_json(species.taxon)},
            {"properties", properties_to_json(species.properties)},
            {"report", report_to_json(species.report)}};
}

} // namespace ecoforge::traits
