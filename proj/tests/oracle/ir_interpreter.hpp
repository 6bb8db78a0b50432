#pragma once

// Reference interpreter that executes a SimulationProgram directly from its
// symbol table and op arguments, without the engine lowering. Used to check
// that the engine backend runs the same program.

#include "ecoforge/engine.hpp"
#include "ecoforge/ir.hpp"

#include <vector>

namespace ecoforge::oracle {

struct OracleConfig {
    std::uint64_t seed = 0;
    int grid_width = 51;
    int grid_height = 51;
    std::int64_t max_ticks = 120;
    bool randomize_initial_age = true;
};

// One frame per tick starting with tick 0, until max_ticks or extinction.
std::vector<engine::SimFrame> interpret(const ir::SimulationProgram& program, const OracleConfig& config);

} // namespace ecoforge::oracle
