#include "ecoforge/compiler.hpp"
#include "ecoforge/engine.hpp"
#include "ecoforge/error.hpp"
#include "ir_interpreter.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace ecoforge;
using engine::Command;
using engine::SimConfig;
using engine::Status;

namespace {

compiler::EngineProgram program_for(const std::string& name)
{
    return compiler::compile_for_engine(compiler::compile(test::load_model(name)));
}

SimConfig config(std::uint64_t seed, std::int64_t ticks)
{
    SimConfig c;
    c.seed = seed;
    c.max_ticks = ticks;
    return c;
}

// Population indices that nothing but reproduction can refill.
std::vector<std::size_t> closed_populations(const ConceptualModel& model, const compiler::EngineProgram& program)
{
    std::set<std::string> fed;
    for (const auto& r : model.relationships)
        if (r.kind() == RelationshipKind::Produces || r.kind() == RelationshipKind::BecomesOnDeath)
            fed.insert(r.target);
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < program.populations.size(); ++p)
        if (!fed.count(program.populations[p].label))
            out.push_back(p);
    return out;
}

} // namespace

TEST(Engine, SameSeedGivesIdenticalCsv)
{
    auto program = program_for("kudzu");
    auto a = engine::to_csv(engine::run(program, config(42, 60)));
    auto b = engine::to_csv(engine::run(program, config(42, 60)));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, engine::to_csv(engine::run(program, config(43, 60))));
    EXPECT_EQ(a.substr(0, a.find('\n')),
              "tick,kudzu_count,kudzu_carbon,hornbeam_count,hornbeam_carbon,bug_count,bug_carbon,light_amount");
}

TEST(Engine, PauseAndResumeIsTransparent)
{
    auto program = program_for("predator_prey");
    auto uninterrupted = engine::run(program, config(9, 80));

    auto st = engine::init_run(program, config(9, 80));
    std::vector<engine::SimFrame> frames{engine::snapshot(st)};
    engine::control(program, st, Command::Start);
    while (st.status != Status::Finished) {
        if (st.tick % 7 == 3 && st.status == Status::Running) {
            auto before = engine::digest(st);
            engine::control(program, st, Command::Stop);
            EXPECT_EQ(st.status, Status::Paused);
            EXPECT_EQ(engine::digest(st), before);
            engine::control(program, st, Command::Start);
        }
        frames.push_back(engine::step(program, st));
    }
    EXPECT_EQ(frames, uninterrupted.frames);
}

TEST(Engine, ControlTransitions)
{
    auto program = program_for("grazing");
    auto st = engine::init_run(program, config(1, 3));
    EXPECT_EQ(st.status, Status::Ready);
    EXPECT_THROW(engine::control(program, st, Command::Stop), Error);
    engine::control(program, st, Command::Start);
    EXPECT_THROW(engine::control(program, st, Command::Start), Error);
    while (st.status != Status::Finished)
        engine::step(program, st);
    EXPECT_EQ(st.tick, 3);
    try {
        engine::control(program, st, Command::Start);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IllegalTransition);
    }
    EXPECT_THROW(engine::step(program, st), Error);

    engine::control(program, st, Command::Reset);
    EXPECT_EQ(st.status, Status::Ready);
    EXPECT_EQ(st.tick, 0);
    EXPECT_EQ(engine::digest(st), engine::digest(engine::init_run(program, config(1, 3))));

    EXPECT_EQ(engine::command_from("start"), Command::Start);
    EXPECT_EQ(engine::command_from("reset"), Command::Reset);
    EXPECT_FALSE(engine::command_from("jump"));
}

TEST(Engine, ConfigIsChecked)
{
    auto program = program_for("grazing");
    auto bad = config(1, 10);
    bad.snapshot_every = 0;
    EXPECT_THROW(engine::init_run(program, bad), Error);
    bad = config(1, -1);
    EXPECT_THROW(engine::init_run(program, bad), Error);
    bad = config(1, 10);
    bad.grid_width = 0;
    EXPECT_THROW(engine::init_run(program, bad), Error);
}

TEST(Engine, SnapshotSpacing)
{
    auto program = program_for("grazing");
    auto c = config(5, 20);
    c.snapshot_every = 4;
    auto series = engine::run(program, c);
    ASSERT_EQ(series.frames.size(), 6u);
    for (std::size_t i = 0; i < series.frames.size(); ++i)
        EXPECT_EQ(series.frames[i].tick, static_cast<std::int64_t>(4 * i));
}

TEST(Engine, EmptyModelRunsToMaxTicks)
{
    auto series = engine::run(program_for("empty"), config(1, 5));
    EXPECT_EQ(series.frames.size(), 6u);
    EXPECT_EQ(series.status, Status::Finished);
}

TEST(Engine, RunStopsWhenEveryPopulationIsExtinct)
{
    auto series = engine::run(program_for("lone_agent"), config(3, 100));
    EXPECT_LE(series.frames.back().tick, 12);
    EXPECT_EQ(series.frames.back().counts, std::vector<std::uint64_t>{0});
}

TEST(Engine, AgentCapIsEnforced)
{
    auto c = config(1, 120);
    c.agent_cap = 10;
    try {
        engine::run(program_for("kudzu"), c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CapacityExceeded);
    }
}

// Property: the tick ledger accounts for every change in agent carbon.
TEST(EngineProperty, LedgerBalancesAgentCarbon)
{
    for (const auto& name : test::bundled_models()) {
        auto program = program_for(name);
        for (std::uint64_t seed : {1, 2, 3}) {
            auto st = engine::init_run(program, config(seed, 60));
            while (st.status != Status::Finished) {
                double before = st.total_agent_carbon();
                engine::step(program, st);
                double after = st.total_agent_carbon();
                double scale = std::max({1.0, before, after});
                ASSERT_NEAR(after - before, st.ledger.net(), 1e-9 * scale) << name << " seed " << seed << " tick " << st.tick;
            }
        }
    }
}

// Property: with no respiration and no photosynthesis, carbon only leaves a
// closed consumer chain through the assimilation loss.
TEST(EngineProperty, ClosedChainLosesOnlyTheUnassimilatedShare)
{
    auto model = test::load_model("closed_chain");
    const double eff = std::get<BioticProperties>(model.components[1].properties).assimilation_efficiency;
    auto program = compiler::compile_for_engine(compiler::compile(model));
    double consumed = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto c = config(seed, 100);
        c.randomize_initial_age = false; // no deaths from old age
        auto st = engine::init_run(program, c);
        while (st.status != Status::Finished) {
            double before = st.total_agent_carbon();
            engine::step(program, st);
            double decrease = before - st.total_agent_carbon();
            double expected = (1 - eff) * st.ledger.consumed_from_agents;
            consumed += st.ledger.consumed_from_agents;
            ASSERT_NEAR(decrease, expected, 1e-9 * std::max(std::abs(expected), 1e-300)) << "seed " << seed;
        }
    }
    EXPECT_GT(consumed, 0);
}

// Property: a population that only reproduction can refill never comes back.
TEST(EngineProperty, ExtinctionIsFinal)
{
    for (const auto& name : test::bundled_models()) {
        auto model = test::load_model(name);
        auto program = compiler::compile_for_engine(compiler::compile(model));
        auto closed = closed_populations(model, program);
        for (std::uint64_t seed : {1, 2}) {
            auto series = engine::run(program, config(seed, 60));
            for (std::size_t p : closed) {
                bool extinct = false;
                for (const auto& f : series.frames) {
                    if (extinct) {
                        ASSERT_EQ(f.counts[p], 0u) << name << " " << program.populations[p].label;
                    }
                    extinct = f.counts[p] == 0;
                }
            }
        }
    }
}

// Property: pools never fall below their minimum amount.
TEST(EngineProperty, PoolsStayAboveMinimum)
{
    for (const auto& name : test::bundled_models()) {
        auto program = program_for(name);
        auto series = engine::run(program, config(4, 60));
        for (const auto& f : series.frames)
            for (std::size_t p = 0; p < f.pools.size(); ++p)
                ASSERT_GE(f.pools[p], program.pools[p].minimum_amount) << name;
    }
}

class OracleEquivalence : public ::testing::TestWithParam<std::string> {};

TEST_P(OracleEquivalence, EngineMatchesIrInterpreter)
{
    auto prog = compiler::compile(test::load_model(GetParam()));
    auto program = compiler::compile_for_engine(prog);
    for (std::uint64_t seed : {1, 7}) {
        oracle::OracleConfig oc;
        oc.seed = seed;
        oc.max_ticks = 60;
        auto expected = oracle::interpret(prog, oc);
        auto actual = engine::run(program, config(seed, 60)).frames;
        ASSERT_EQ(actual.size(), expected.size()) << "seed " << seed;
        for (std::size_t i = 0; i < actual.size(); ++i)
            ASSERT_EQ(actual[i], expected[i]) << "seed " << seed << " tick " << i;
    }
}

INSTANTIATE_TEST_SUITE_P(SmallModels, OracleEquivalence,
                         ::testing::Values("predator_prey", "pollination", "decomposition", "parasite", "grazing",
                                           "lone_agent", "closed_chain"));
