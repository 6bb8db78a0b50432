#include "ecoforge/compiler.hpp"
#include "ecoforge/error.hpp"
#include "ecoforge/netlogo_check.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <regex>
#include <set>

using namespace ecoforge;
using compiler::SlotKind;
using ir::OpKind;
using ir::Phase;
using ir::Role;

namespace {

std::size_t count_matches(const std::string& text, const std::regex& re)
{
    return static_cast<std::size_t>(
        std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

std::size_t count_kind(const ConceptualModel& m, RelationshipKind kind)
{
    return static_cast<std::size_t>(
        std::count_if(m.relationships.begin(), m.relationships.end(), [&](const auto& r) { return r.kind() == kind; }));
}

std::size_t count_biotic(const ConceptualModel& m)
{
    return static_cast<std::size_t>(std::count_if(m.components.begin(), m.components.end(),
                                                  [](const auto& c) { return c.kind() == ComponentKind::Biotic; }));
}

} // namespace

TEST(DomainModel, RolesFollowProperties)
{
    auto domain = compiler::build_domain_model(test::load_model("kudzu"));
    ASSERT_EQ(domain.populations.size(), 4u);
    EXPECT_EQ(domain.populations[0].role, Role::SubstancePool); // light
    EXPECT_EQ(domain.populations[1].role, Role::DensityPool);   // kudzu: photosynthetic, stationary
    EXPECT_EQ(domain.populations[2].role, Role::DensityPool);
    EXPECT_EQ(domain.populations[3].role, Role::MobileAgent);
    EXPECT_EQ(domain.interactions.size(), 4u);
    EXPECT_EQ(domain.index_of("bug"), 3u);
    EXPECT_FALSE(domain.index_of("nope"));
}

TEST(Ir, ProgramIsWellFormed)
{
    for (const auto& name : test::bundled_models()) {
        auto prog = compiler::compile(test::load_model(name));
        EXPECT_TRUE(ir::check_program(prog).empty()) << name;
        ASSERT_EQ(prog.phases.size(), 6u);
        for (std::size_t i = 0; i < 6; ++i)
            EXPECT_EQ(prog.phases[i].phase, ir::kPhaseOrder[i]);
        // every op is scheduled exactly once
        std::set<int> ids;
        for (const auto& op : prog.init)
            ids.insert(op.id);
        for (const auto& block : prog.phases)
            for (const auto& op : block.ops)
                ids.insert(op.id);
        EXPECT_EQ(std::set<int>(prog.schedule.begin(), prog.schedule.end()), ids) << name;
        EXPECT_EQ(prog.schedule.size(), ids.size()) << name;
    }
}

TEST(Ir, KudzuOpsPerPhase)
{
    auto prog = compiler::compile(test::load_model("kudzu"));
    auto kinds = [&](Phase p) {
        std::multiset<OpKind> out;
        for (const auto& op : prog.phase(p).ops)
            out.insert(op.kind);
        return out;
    };
    EXPECT_EQ(kinds(Phase::Move), (std::multiset<OpKind>{OpKind::Move}));
    EXPECT_EQ(kinds(Phase::Metabolize).count(OpKind::Photosynthesize), 2u);
    EXPECT_EQ(kinds(Phase::Metabolize).count(OpKind::Respire), 3u);
    EXPECT_EQ(kinds(Phase::Interact).count(OpKind::CarbonTransfer), 2u);
    EXPECT_EQ(kinds(Phase::Interact).count(OpKind::GrowthModifier), 2u);
    EXPECT_EQ(kinds(Phase::Reproduce).count(OpKind::Reproduce), 3u);
    EXPECT_EQ(kinds(Phase::Die).count(OpKind::Die), 3u);
    EXPECT_EQ(kinds(Phase::Regrow).count(OpKind::Regrow), 1u);

    // light couples both plants' photosynthesis
    for (const auto& op : prog.phase(Phase::Metabolize).ops)
        if (op.kind == OpKind::Photosynthesize) {
            EXPECT_EQ(op.args_for("light").size(), 1u);
        }
}

TEST(Ir, InvalidModelDoesNotCompile)
{
    auto model = test::load_model("kudzu");
    std::get<BioticProperties>(model.components[1].properties).lifespan = -1;
    try {
        compiler::compile(model);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Validation);
    }
}

TEST(EngineProgram, OperandsAreResolvedToSlots)
{
    for (const auto& name : test::bundled_models()) {
        auto prog = compiler::compile(test::load_model(name));
        auto ep = compiler::compile_for_engine(prog);
        EXPECT_EQ(ep.populations.size(), prog.populations.size()) << name;
        EXPECT_EQ(ep.pools.size(), prog.pools.size()) << name;
        auto check = [&](const compiler::Slot& s) {
            if (s.kind == SlotKind::Agents) {
                EXPECT_LT(s.index, ep.populations.size()) << name;
            }
            if (s.kind == SlotKind::Pool) {
                EXPECT_LT(s.index, ep.pools.size()) << name;
            }
        };
        std::size_t ops = prog.init.size();
        for (const auto& i : ep.init) {
            check(i.subject);
            check(i.object);
        }
        EXPECT_EQ(ep.init.size(), ops) << name;
        for (std::size_t p = 0; p < 6; ++p) {
            EXPECT_EQ(ep.phases[p].size(), prog.phases[p].ops.size()) << name;
            for (const auto& i : ep.phases[p]) {
                check(i.subject);
                check(i.object);
                EXPECT_LE(i.group, ep.group_count) << name;
                for (const auto& c : i.couplings)
                    EXPECT_LT(c.pool, ep.pools.size()) << name;
            }
        }
    }
}

TEST(EngineProgram, JsonIsStable)
{
    auto prog = compiler::compile(test::load_model("kudzu"));
    auto a = canonical_dump(compiler::engine_program_to_json(compiler::compile_for_engine(prog)));
    auto b = canonical_dump(compiler::engine_program_to_json(compiler::compile_for_engine(compiler::compile(test::load_model("kudzu")))));
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("\"Photosynthesize\""), std::string::npos);
}

TEST(NetLogo, KudzuMatchesGoldenFile)
{
    auto source = compiler::emit_netlogo(compiler::compile(test::load_model("kudzu")));
    EXPECT_EQ(source, test::read_file(test::source_path("data/golden/kudzu.nlogo")));
}

TEST(NetLogo, EmptyModelMatchesGoldenFile)
{
    auto source = compiler::emit_netlogo(compiler::compile(test::load_model("empty")));
    EXPECT_EQ(source, test::read_file(test::source_path("data/golden/empty.nlogo")));
}

TEST(NetLogo, EveryBundledModelPassesTheGrammarCheck)
{
    const std::regex breed(R"(^breed \[)", std::regex::multiline);
    const std::regex eat(R"(^to eat-)", std::regex::multiline);
    for (const auto& name : test::bundled_models()) {
        auto model = test::load_model(name);
        auto source = compiler::emit_netlogo(compiler::compile(model));
        auto problems = netlogo::check_source(source);
        for (const auto& p : problems)
            ADD_FAILURE() << name << ":" << p.line << ": " << p.message;
        EXPECT_EQ(count_matches(source, breed), count_biotic(model)) << name;
        EXPECT_EQ(count_matches(source, eat), count_kind(model, RelationshipKind::Consumes)) << name;
    }
}

TEST(NetLogo, CheckerRejectsBrokenSource)
{
    EXPECT_FALSE(netlogo::check_source("to go\n  ask turtles [ fd 1\nend\n").empty());
    EXPECT_FALSE(netlogo::check_source("to go\n  frobnicate 3\nend\n").empty());
    EXPECT_FALSE(netlogo::check_source("to go\nto stop-it\nend\n").empty());
    EXPECT_TRUE(netlogo::check_source("globals [x]\nto go\n  set x (x + 1)\nend\n").empty());
}

TEST(NetLogo, Names)
{
    EXPECT_EQ(netlogo::slugify("Kudzu Bug"), "kudzu-bug");
    EXPECT_EQ(netlogo::slugify("American  hornbeam!"), "american-hornbeam");
    EXPECT_EQ(netlogo::pluralize("kudzu-bug"), "kudzu-bugs");
    EXPECT_EQ(netlogo::pluralize("grass"), "grasses");
    EXPECT_TRUE(netlogo::is_primitive("ask"));
    EXPECT_FALSE(netlogo::is_primitive("eat-kudzu"));
}
