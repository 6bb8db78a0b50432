#pragma once

#include "ecoforge/model.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ecoforge::ir {

enum class Role { MobileAgent, DensityPool, SubstancePool };
std::string_view to_string(Role role);

struct Population {
    std::string component_id;
    std::string label;
    Role role;
    ComponentProperties properties;
};

struct InteractionSpec {
    std::string relationship_id;
    RelationshipKind kind;
    std::size_t source; // index into DomainModel::populations
    std::size_t target;
    RelationshipParams params;
};

struct DomainModel {
    std::string name;
    std::vector<Population> populations; // component declaration order
    std::vector<InteractionSpec> interactions; // relationship declaration order

    std::optional<std::size_t> index_of(std::string_view component_id) const;
};

// Tick phases in execution order.
enum class Phase { Move, Metabolize, Interact, Reproduce, Die, Regrow };
inline constexpr std::array<Phase, 6> kPhaseOrder = {Phase::Move,      Phase::Metabolize, Phase::Interact,
                                                     Phase::Reproduce, Phase::Die,        Phase::Regrow};
std::string_view to_string(Phase phase);

enum class OpKind {
    Spawn,
    InitPool,
    Move,
    Photosynthesize,
    Respire,
    EncounterTest,
    CarbonTransfer,
    Removal,
    Emission,
    GrowthModifier,
    Reproduce,
    Die,
    OnDeathHook,
    Conversion,
    Regrow,
};
std::string_view to_string(OpKind kind);

enum class SymbolKind { Population, Pool, Parameter, Constant };

struct Symbol {
    std::string name;
    SymbolKind kind;
    double value = 0;         // Parameter / Constant only
    std::optional<Role> role; // Population / Pool only
};

enum class Access { Read, Write };

// One argument: role name plus the symbol it binds. Roles may repeat (e.g. "light").
struct Arg {
    std::string role;
    std::string symbol;
    Access access;
};

struct Op {
    int id = 0;
    OpKind kind;
    std::string group; // relationship id for interaction ops, component id otherwise
    std::vector<Arg> args;

    const Arg* arg(std::string_view role) const;
    std::vector<const Arg*> args_for(std::string_view role) const;
};

struct PhaseBlock {
    Phase phase;
    std::vector<Op> ops;
};

struct AsgEdge {
    int op;
    std::string symbol;
    Access access;
};

struct SimulationProgram {
    std::string name;
    std::map<std::string, Symbol> symbols;
    std::vector<std::string> populations; // population symbols, declaration order (biotic)
    std::vector<std::string> pools;       // pool symbols, declaration order
    std::vector<std::string> components;  // component ids, declaration order
    std::vector<std::string> labels;      // display labels, parallel to components
    std::vector<std::string> relationships; // relationship ids, declaration order
    std::vector<Op> init;
    std::vector<PhaseBlock> phases; // always all six, in kPhaseOrder
    std::vector<AsgEdge> asg;
    std::vector<int> schedule; // init op ids, then tick op ids in phase order

    const Symbol& symbol(const std::string& name) const;
    double value(const std::string& name) const;
    const PhaseBlock& phase(Phase p) const;
    const Op* find_op(int id) const;
};

std::string population_symbol(std::string_view component_id);
std::string pool_symbol(std::string_view component_id);
std::string param_symbol(std::string_view owner, std::string_view field);

// Checks ASG resolution, schedule coverage and phase ordering; returns problems found.
std::vector<std::string> check_program(const SimulationProgram& program);

Json program_to_json(const SimulationProgram& program);

} // namespace ecoforge::ir
