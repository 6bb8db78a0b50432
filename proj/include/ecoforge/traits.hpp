#pragma once

#include "ecoforge/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ecoforge::traits {

struct TaxonMatch {
    std::string taxon_id;
    std::string canonical_name;
    std::vector<std::string> common_names;
    std::vector<std::string> ancestry; // root -> leaf

    friend bool operator==(const TaxonMatch&, const TaxonMatch&) = default;
};

struct TraitRecord {
    std::string taxon_id;
    std::string predicate;
    double value = 0;
    std::string unit;
    std::string source;

    friend bool operator==(const TraitRecord&, const TraitRecord&) = default;
};

enum class Method { Direct, AncestryEstimate, Default };
std::string_view to_string(Method method);

struct DerivationInput {
    std::size_t record_index; // position in the records passed to derive_parameters
    TraitRecord record;
    double normalized;
};

struct DerivationEntry {
    std::string parameter;
    Method method;
    std::vector<DerivationInput> inputs;
    std::string formula; // arithmetic over the printed numbers; evaluates to value exactly
    double value;
};

struct DerivationReport {
    std::vector<DerivationEntry> entries; // one per biotic property, in property order

    const DerivationEntry* find(std::string_view parameter) const;
};

Json report_to_json(const DerivationReport& report);

struct CarbonEstimationTable {
    std::vector<std::pair<std::string, double>> constants; // ancestry taxon -> kg carbon per kg body mass
    double default_constant = 0.1;

    static const CarbonEstimationTable& shipped();
    double constant_for(const std::vector<std::string>& ancestry) const;
};

// Ancestry scanned root -> leaf; the first listed taxon that matches picks the constant.
double estimate_carbon_biomass(double body_mass, const std::vector<std::string>& ancestry);

std::pair<BioticProperties, DerivationReport> derive_parameters(const std::vector<TraitRecord>& records,
                                                                const std::vector<std::string>& ancestry,
                                                                const BioticProperties& defaults);

// Table 1 predicate aliases per property (empty for properties never read from traits).
const std::vector<std::string>& predicates_for(std::string_view parameter);

class TraitBackend {
public:
    virtual ~TraitBackend() = default;

    // Ranked: exact scientific name, exact common name, prefix, substring.
    virtual std::vector<TaxonMatch> search_taxa(std::string_view query) = 0;
    virtual TaxonMatch taxon(const std::string& taxon_id) = 0;
    // Sorted by (predicate, source), ties in source order.
    virtual std::vector<TraitRecord> fetch_traits(const std::string& taxon_id) = 0;
};

// Directory of one-JSON-file-per-taxon fixtures, loaded eagerly.
class FixtureBackend final : public TraitBackend {
public:
    explicit FixtureBackend(const std::string& directory);

    std::vector<TaxonMatch> search_taxa(std::string_view query) override;
    TaxonMatch taxon(const std::string& taxon_id) override;
    std::vector<TraitRecord> fetch_traits(const std::string& taxon_id) override;

    std::size_t size() const { return taxa_.size(); }

private:
    struct Entry {
        TaxonMatch match;
        std::vector<TraitRecord> records;
    };
    std::vector<Entry> taxa_; // sorted by taxon_id

    const Entry& entry(const std::string& taxon_id) const;
};

// EOL-style HTTP client: search API plus Cypher queries. Never used by the test
// suite against the real service.
class LiveBackend final : public TraitBackend {
public:
    explicit LiveBackend(std::string base_url);
    ~LiveBackend() override;

    std::vector<TaxonMatch> search_taxa(std::string_view query) override;
    TaxonMatch taxon(const std::string& taxon_id) override;
    std::vector<TraitRecord> fetch_traits(const std::string& taxon_id) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// "fixtures:<dir>" or "live:<base-url>".
std::unique_ptr<TraitBackend> make_backend(std::string_view spec);

// ECOFORGE_TRAIT_BACKEND, defaulting to the shipped fixtures.
std::unique_ptr<TraitBackend> backend_from_env();

std::string default_fixture_dir();

Json taxon_to_json(const TaxonMatch& match);

struct SpeciesParameters {
    TaxonMatch taxon;
    BioticProperties properties;
    DerivationReport report;
};

SpeciesParameters derive_for_taxon(TraitBackend& backend, const std::string& taxon_id);
Json species_parameters_to_json(const SpeciesParameters& species);

} // namespace ecoforge::traits
