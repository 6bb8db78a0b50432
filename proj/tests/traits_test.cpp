#include "ecoforge/error.hpp"
#include "ecoforge/traits.hpp"
#include "ecoforge/units.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <random>

using namespace ecoforge;
using namespace ecoforge::traits;

namespace {

// Evaluates the +, -, *, / and parenthesis arithmetic written into derivation formulas.
class Arithmetic {
public:
    explicit Arithmetic(std::string_view text) : s_(text) {}

    double eval()
    {
        double v = sum();
        skip();
        if (pos_ != s_.size())
            throw std::runtime_error("trailing text in formula: " + std::string(s_));
        return v;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip()
    {
        while (pos_ < s_.size() && s_[pos_] == ' ')
            ++pos_;
    }
    bool take(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    double sum()
    {
        double v = product();
        while (true) {
            if (take('+'))
                v += product();
            else if (take('-'))
                v -= product();
            else
                return v;
        }
    }
    double product()
    {
        double v = atom();
        while (true) {
            if (take('*'))
                v *= atom();
            else if (take('/'))
                v /= atom();
            else
                return v;
        }
    }
    double atom()
    {
        if (take('(')) {
            double v = sum();
            if (!take(')'))
                throw std::runtime_error("unbalanced formula");
            return v;
        }
        skip();
        std::string num(s_.substr(pos_));
        std::size_t used = 0;
        double v = std::stod(num, &used);
        pos_ += used;
        return v;
    }
};

TraitRecord rec(std::string predicate, double value, std::string unit, std::string source = "test")
{
    return {"t", std::move(predicate), value, std::move(unit), std::move(source)};
}

FixtureBackend shipped_fixtures()
{
    return FixtureBackend(test::source_path("data/taxa"));
}

} // namespace

TEST(CarbonEstimation, ShippedConstants)
{
    EXPECT_EQ(estimate_carbon_biomass(10, {"Animalia", "Chordata", "Mammalia"}), 1.6);
    EXPECT_EQ(estimate_carbon_biomass(10, {"Animalia", "Chordata", "Reptilia"}), 1.22);
    EXPECT_EQ(estimate_carbon_biomass(10, {}), 1.0);
    EXPECT_EQ(estimate_carbon_biomass(10, {"Plantae", "Bryophyta"}), 1.0);
}

TEST(CarbonEstimation, FirstListedTaxonWins)
{
    CarbonEstimationTable t{{{"Reptilia", 0.5}, {"Crocodylia", 0.25}}, 0.1};
    EXPECT_EQ(t.constant_for({"Crocodylia", "Reptilia"}), 0.25);
    EXPECT_EQ(t.constant_for({"Aves"}), 0.1);
}

TEST(Derivation, LifespanIsAveragedInMonths)
{
    auto [props, report] = derive_parameters({rec("life span", 10, "years"), rec("life span", 14, "years")}, {},
                                             default_biotic_properties());
    EXPECT_EQ(props.lifespan, 144);
    const auto* e = report.find("lifespan");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->method, Method::Direct);
    EXPECT_EQ(e->inputs.size(), 2u);
    EXPECT_EQ(e->formula, "(120 + 168) / 2");
}

TEST(Derivation, EmptyRecordsGiveCompleteDefaults)
{
    auto defaults = default_biotic_properties();
    auto [props, report] = derive_parameters({}, {}, defaults);
    EXPECT_EQ(props, defaults);
    ASSERT_EQ(report.entries.size(), kBioticFields.size());
    for (std::size_t i = 0; i < kBioticFields.size(); ++i) {
        EXPECT_EQ(report.entries[i].parameter, kBioticFields[i].name);
        EXPECT_EQ(report.entries[i].method, Method::Default);
        EXPECT_TRUE(report.entries[i].inputs.empty());
        EXPECT_EQ(report.entries[i].value, defaults.*kBioticFields[i].member);
    }
}

TEST(Derivation, UnitsAreNormalizedBeforeAveraging)
{
    auto [props, report] =
        derive_parameters({rec("Body Mass", 500, "g"), rec("body mass", 1.5, "kg"), rec("inter-birth interval", 60.88, "d")},
                          {}, default_biotic_properties());
    EXPECT_DOUBLE_EQ(props.body_mass, 1.0);
    EXPECT_DOUBLE_EQ(props.reproductive_interval, 2.0);
}

TEST(Derivation, UnusableRecordsAreSkipped)
{
    auto defaults = default_biotic_properties();
    auto [props, report] = derive_parameters(
        {rec("life span", 5, "furlongs"), rec("life span", -3, "years"), rec("life span", 2, "kg"), rec("colour", 4, "")},
        {}, defaults);
    EXPECT_EQ(props.lifespan, defaults.lifespan);
    EXPECT_EQ(report.find("lifespan")->method, Method::Default);
}

TEST(Derivation, CarbonFallsBackToAncestryEstimate)
{
    auto [props, report] = derive_parameters({rec("body mass", 10, "kg")}, {"Animalia", "Mammalia"},
                                             default_biotic_properties());
    EXPECT_EQ(props.carbon_biomass, 1.6);
    EXPECT_EQ(report.find("carbon_biomass")->method, Method::AncestryEstimate);
    EXPECT_EQ(report.find("carbon_biomass")->formula, "0.16 * 10");
}

TEST(Derivation, MeasuredLifespanHalvesLateMaturity)
{
    auto [props, report] = derive_parameters({rec("life span", 1, "years"), rec("age at maturity", 2, "years")}, {},
                                             default_biotic_properties());
    EXPECT_EQ(props.lifespan, 12);
    EXPECT_EQ(props.reproductive_maturity, 6);
    EXPECT_EQ(report.find("reproductive_maturity")->method, Method::Default);
}

TEST(Derivation, DefaultLifespanStretchesPastMaturity)
{
    auto [props, report] =
        derive_parameters({rec("age at maturity", 3, "years")}, {}, default_biotic_properties());
    EXPECT_EQ(props.reproductive_maturity, 36);
    EXPECT_EQ(props.lifespan, 72);
    EXPECT_LT(props.reproductive_maturity, props.lifespan);
}

TEST(Derivation, ShippedFixturesGiveExpectedValues)
{
    auto backend = shipped_fixtures();

    auto muskrat = derive_for_taxon(backend, "1037903").properties;
    EXPECT_EQ(muskrat.lifespan, 36);
    EXPECT_EQ(muskrat.reproductive_maturity, 8);
    EXPECT_EQ(muskrat.reproductive_interval, 1);
    EXPECT_EQ(muskrat.offspring_count, 3);
    EXPECT_DOUBLE_EQ(muskrat.body_mass, 1.36077711);
    EXPECT_DOUBLE_EQ(muskrat.carbon_biomass, 0.16 * 1.36077711);
    EXPECT_EQ(muskrat.assimilation_efficiency, 0.4);

    auto gator = derive_for_taxon(backend, "795869");
    EXPECT_EQ(gator.properties.lifespan, 600);
    EXPECT_EQ(gator.properties.reproductive_maturity, 120);
    EXPECT_DOUBLE_EQ(gator.properties.carbon_biomass, 24.4);
    EXPECT_DOUBLE_EQ(gator.properties.respiratory_rate, 0.2 * 200 * units::kSecondsPerMonth / 39e6);
    EXPECT_EQ(gator.report.find("respiratory_rate")->method, Method::AncestryEstimate);
    EXPECT_EQ(gator.properties.assimilation_efficiency, 0.8);

    auto hawk = derive_for_taxon(backend, "1049056").properties;
    EXPECT_DOUBLE_EQ(hawk.lifespan, (252 + 357.6) / 2);
    EXPECT_DOUBLE_EQ(hawk.body_mass, 1.152);

    auto moss = derive_for_taxon(backend, "900001");
    for (const auto& e : moss.report.entries)
        if (e.parameter != "carbon_biomass") {
            EXPECT_EQ(e.method, Method::Default) << e.parameter;
        }
}

// Property: every reported formula evaluates to the reported value, and every
// input points back at the record it came from.
TEST(DerivationProperty, FormulasRecomputeValues)
{
    auto backend = shipped_fixtures();
    std::vector<std::pair<std::vector<TraitRecord>, std::vector<std::string>>> cases;
    for (const char* id : {"795869", "1149350", "640226", "47183418", "1037903", "1049056", "900001"})
        cases.emplace_back(backend.fetch_traits(id), backend.taxon(id).ancestry);

    std::mt19937_64 rng(7);
    const char* predicates[] = {"life span", "age at maturity", "inter-birth interval", "offspring", "body mass",
                                "basal metabolic rate", "net carbon fixation rate", "respiratory rate"};
    const char* unit_for[] = {"years", "months", "days", "count", "g", "W/kg", "g/m2/day", "g/day"};
    std::uniform_int_distribution<int> pick(0, 7);
    std::uniform_real_distribution<double> value(0.01, 90);
    for (int i = 0; i < 100; ++i) {
        std::vector<TraitRecord> records;
        int n = pick(rng);
        for (int j = 0; j < n; ++j) {
            int p = pick(rng);
            records.push_back(rec(predicates[p], value(rng), unit_for[p]));
        }
        cases.emplace_back(records, i % 2 ? std::vector<std::string>{"Mammalia", "Rodentia"} : std::vector<std::string>{});
    }

    for (const auto& [records, ancestry] : cases) {
        auto [props, report] = derive_parameters(records, ancestry, default_biotic_properties());
        for (std::size_t i = 0; i < kBioticFields.size(); ++i) {
            const auto& e = report.entries[i];
            EXPECT_EQ(props.*kBioticFields[i].member, e.value);
            double recomputed = Arithmetic(e.formula).eval();
            EXPECT_NEAR(recomputed, e.value, 1e-12 * std::max(1.0, std::abs(e.value))) << e.parameter << ": " << e.formula;
            for (const auto& in : e.inputs) {
                ASSERT_LT(in.record_index, records.size());
                EXPECT_EQ(records[in.record_index], in.record);
            }
        }
        EXPECT_LT(props.reproductive_maturity, props.lifespan);
    }
}

TEST(FixtureBackend, SearchIsRanked)
{
    auto backend = shipped_fixtures();
    EXPECT_EQ(backend.size(), 7u);

    auto kudzu = backend.search_taxa("Kudzu");
    ASSERT_EQ(kudzu.size(), 2u);
    EXPECT_EQ(kudzu[0].taxon_id, "640226");   // exact common name
    EXPECT_EQ(kudzu[1].taxon_id, "47183418"); // prefix of "kudzu bug"

    EXPECT_EQ(backend.search_taxa("pueraria montana")[0].taxon_id, "640226");
    EXPECT_EQ(backend.search_taxa("wood").size(), 1u);
    EXPECT_TRUE(backend.search_taxa("unicorn").empty());
}

TEST(FixtureBackend, Errors)
{
    auto backend = shipped_fixtures();
    try {
        backend.search_taxa("   ");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyQuery);
    }
    try {
        backend.taxon("nope");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownTaxon);
    }
    EXPECT_THROW(FixtureBackend("/nonexistent/dir"), Error);
    EXPECT_THROW(make_backend("ftp://x"), Error);
}

TEST(FixtureBackend, RecordsAreSortedByPredicateThenSource)
{
    auto records = shipped_fixtures().fetch_traits("1049056");
    for (std::size_t i = 1; i < records.size(); ++i)
        EXPECT_LE(std::tie(records[i - 1].predicate, records[i - 1].source),
                  std::tie(records[i].predicate, records[i].source));
}

TEST(Units, Conversions)
{
    EXPECT_EQ(units::normalize_unit(2, "years", "months"), 24);
    EXPECT_DOUBLE_EQ(units::normalize_unit(30.44, "days", "months"), 1);
    EXPECT_DOUBLE_EQ(units::normalize_unit(1, "lb", "kg"), 0.45359237);
    EXPECT_DOUBLE_EQ(units::normalize_unit(1000 / 30.44, "g/day", "kg/month"), 1);
    EXPECT_THROW(units::normalize_unit(1, "kg", "months"), Error);
    EXPECT_THROW(units::normalize_unit(1, "parsecs", "months"), Error);
}
