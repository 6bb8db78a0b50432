#pragma once

#include "ecoforge/compiler.hpp"
#include "ecoforge/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ecoforge::engine {

struct SimConfig {
    std::uint64_t seed = 0;
    int grid_width = 51;
    int grid_height = 51;
    std::int64_t max_ticks = 120;
    std::int64_t snapshot_every = 1;
    // Initial ages uniform in [0, lifespan); off starts every agent at age 0.
    bool randomize_initial_age = true;
    // Overrides the program's cap when set.
    std::optional<std::uint64_t> agent_cap;
};

// Throws Error(Schema) for out-of-range values.
void check_config(const SimConfig& cfg);

enum class Status { Ready, Running, Paused, Finished };
enum class Command { Start, Stop, Reset };

std::string_view to_string(Status status);
std::optional<Command> command_from(std::string_view name);

struct Agent {
    std::uint64_t id = 0;
    double x = 0;
    double y = 0;
    double heading = 0;
    double carbon = 0;
    std::int64_t age = 0;
    bool alive = true;
};

// Carbon flows of one tick, in kg. Agent carbon changes by exactly
// photosynthesized - respired - consumed_from_agents + assimilated - destroyed
// + affected - died + spawned.
struct TickLedger {
    double photosynthesized = 0;
    double respired = 0;
    double consumed_from_agents = 0;
    double consumed_from_pools = 0;
    double assimilated = 0;
    double destroyed = 0;
    double affected = 0;
    double died = 0;
    double spawned = 0;

    double net() const
    {
        return photosynthesized - respired - consumed_from_agents + assimilated - destroyed + affected - died +
               spawned;
    }
};

struct SimState {
    SimConfig config;
    std::int64_t tick = 0;
    Status status = Status::Ready;
    std::vector<std::vector<Agent>> populations; // live agents, ascending id
    std::vector<double> pools;
    std::vector<Rng> streams; // one per component declaration index
    std::vector<double> residues; // per-conversion carbon not yet turned into an agent
    std::uint64_t next_id = 1;
    TickLedger ledger; // flows of the most recent tick

    std::uint64_t count(std::size_t population) const { return populations.at(population).size(); }
    double total_carbon(std::size_t population) const;
    double total_agent_carbon() const;
};

struct SimFrame {
    std::int64_t tick = 0;
    std::vector<std::uint64_t> counts;
    std::vector<double> carbon;
    std::vector<double> pools;

    friend bool operator==(const SimFrame&, const SimFrame&) = default;
};

struct TimeSeries {
    SimConfig config;
    std::vector<std::string> populations; // column prefixes
    std::vector<std::string> pools;
    std::vector<SimFrame> frames;
    Status status = Status::Ready;
};

SimState init_run(const compiler::EngineProgram& program, const SimConfig& cfg);

// Advances one month. Allowed from Ready, Running and Paused; the state becomes
// Finished once max_ticks is reached or every biotic population is extinct.
SimFrame step(const compiler::EngineProgram& program, SimState& state);

void control(const compiler::EngineProgram& program, SimState& state, Command command);

SimFrame snapshot(const SimState& state);

bool should_finish(const SimState& state);

TimeSeries run(const compiler::EngineProgram& program, const SimConfig& cfg);

// FNV-1a over every field that influences future ticks.
std::uint64_t digest(const SimState& state);

std::string csv_header(const compiler::EngineProgram& program);
std::string csv_row(const SimFrame& frame);
std::string to_csv(const TimeSeries& series);

Json frame_to_json(const compiler::EngineProgram& program, const SimFrame& frame);
Json series_to_json(const TimeSeries& series);

} // namespace ecoforge::engine
