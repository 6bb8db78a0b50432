#pragma once

#include "ecoforge/ir.hpp"
#include "ecoforge/model.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ecoforge::compiler {

// Stage 1-2: canonical model -> domain model with population roles.
ir::DomainModel build_domain_model(const ConceptualModel& model);

// Stage 3: domain behaviors decomposed into simulation ops.
ir::SimulationProgram lower_to_ir(const ir::DomainModel& domain);

// Validates first; throws Error(Validation) with the report text when the model has errors.
ir::SimulationProgram compile(const ConceptualModel& model);

// Stage 4a: NetLogo 6 code-tab source.
std::string emit_netlogo(const ir::SimulationProgram& program);

// Stage 4b: engine program. Every operand is an index or a number.
enum class SlotKind : std::uint8_t { None, Agents, Pool };

struct Slot {
    SlotKind kind = SlotKind::None;
    std::uint32_t index = 0;

    friend bool operator==(const Slot&, const Slot&) = default;
};

struct Coupling {
    std::uint32_t pool;
    double initial_amount;

    friend bool operator==(const Coupling&, const Coupling&) = default;
};

// Operand layout per opcode (k = constants):
//   Spawn           subject=agents   k0 count, k1 lifespan, k2 carbon, k3 heading
//   InitPool        subject=pool     k0 amount
//   Move            subject=agents   k0 velocity, k1 max turn (degrees)
//   Photosynthesize subject=agents   k0 rate; couplings = light pools
//   Respire         subject=agents   k0 rate
//   EncounterTest   subject, object  k0 probability, k1 refuge (-1 when none)
//   CarbonTransfer  subject, object  k0 rate, k1 efficiency
//   Removal         object           k0 destroy fraction (-1 for consumption removal)
//   Emission        subject, object  k0 mean per tick, k1 spawned carbon, k2 heading
//   GrowthModifier  object           k0 modifier
//   Reproduce       subject=agents   k0 maturity, k1 interval, k2 offspring, k3 endowment fraction, k4 stationary
//   Die             subject=agents   k0 lifespan
//   OnDeathHook     subject=agents
//   Conversion      subject, object  k0 converted mass, k1 target body mass, k2 target carbon, k3 heading
//   Regrow          subject=pool     k0 growth, k1 minimum
struct Instr {
    ir::OpKind op;
    std::uint32_t group = 0; // 1-based interaction group shared by ops from one relationship; 0 is none
    Slot subject;
    Slot object;
    std::array<double, 5> k{};
    std::vector<Coupling> couplings;

    friend bool operator==(const Instr&, const Instr&) = default;
};

struct PopulationInfo {
    std::string label; // output column prefix only
    ir::Role role;
    std::uint32_t stream; // RNG substream (component declaration index)
    double minimum_population;
    bool photosynthetic;
};

struct PoolInfo {
    std::string label;
    std::uint32_t stream;
    double minimum_amount;
};

struct EngineProgram {
    std::vector<PopulationInfo> populations;
    std::vector<PoolInfo> pools;
    std::vector<Instr> init;
    std::array<std::vector<Instr>, 6> phases; // kPhaseOrder
    std::uint32_t group_count = 0;
    std::uint64_t agent_cap = 1'000'000;

    const std::vector<Instr>& phase(ir::Phase p) const { return phases[static_cast<std::size_t>(p)]; }
};

EngineProgram compile_for_engine(const ir::SimulationProgram& program);

Json engine_program_to_json(const EngineProgram& program);

} // namespace ecoforge::compiler
