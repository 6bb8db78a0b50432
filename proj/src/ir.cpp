#include "ecoforge/ir.hpp"
#include "ecoforge/error.hpp"

#include <algorithm>
#include <set>

namespace ecoforge::ir {

std::string_view to_string(Role role)
{
    switch (role) {
    case Role::MobileAgent: return "MobileAgent";
    case Role::DensityPool: return "DensityPool";
    case Role::SubstancePool: return "SubstancePool";
    }
    return "MobileAgent";
}

std::string_view to_string(Phase phase)
{
    switch (phase) {
    case Phase::Move: return "move";
    case Phase::Metabolize: return "metabolize";
    case Phase::Interact: return "interact";
    case Phase::Reproduce: return "reproduce";
    case Phase::Die: return "die";
    case Phase::Regrow: return "regrow";
    }
    return "move";
}

std::string_view to_string(OpKind kind)
{
    switch (kind) {
    case OpKind::Spawn: return "Spawn";
    case OpKind::InitPool: return "InitPool";
    case OpKind::Move: return "Move";
    case OpKind::Photosynthesize: return "Photosynthesize";
    case OpKind::Respire: return "Respire";
    case OpKind::EncounterTest: return "EncounterTest";
    case OpKind::CarbonTransfer: return "CarbonTransfer";
    case OpKind::Removal: return "Removal";
    case OpKind::Emission: return "Emission";
    case OpKind::GrowthModifier: return "GrowthModifier";
    case OpKind::Reproduce: return "Reproduce";
    case OpKind::Die: return "Die";
    case OpKind::OnDeathHook: return "OnDeathHook";
    case OpKind::Conversion: return "Conversion";
    case OpKind::Regrow: return "Regrow";
    }
    return "Spawn";
}

std::optional<std::size_t> DomainModel::index_of(std::string_view component_id) const
{
    for (std::size_t i = 0; i < populations.size(); ++i)
        if (populations[i].component_id == component_id)
            return i;
    return std::nullopt;
}

const Arg* Op::arg(std::string_view role) const
{
    for (const auto& a : args)
        if (a.role == role)
            return &a;
    return nullptr;
}

std::vector<const Arg*> Op::args_for(std::string_view role) const
{
    std::vector<const Arg*> out;
    for (const auto& a : args)
        if (a.role == role)
            out.push_back(&a);
    return out;
}

const Symbol& SimulationProgram::symbol(const std::string& name) const
{
    auto it = symbols.find(name);
    if (it == symbols.end())
        throw Error(ErrorCode::InvariantBreach, "unresolved symbol '" + name + "'", name);
    return it->second;
}

double SimulationProgram::value(const std::string& name) const
{
    return symbol(name).value;
}

const PhaseBlock& SimulationProgram::phase(Phase p) const
{
    for (const auto& block : phases)
        if (block.phase == p)
            return block;
    throw Error(ErrorCode::InvariantBreach, "program has no " + std::string(to_string(p)) + " phase");
}

const Op* SimulationProgram::find_op(int id) const
{
    for (const auto& op : init)
        if (op.id == id)
            return &op;
    for (const auto& block : phases)
        for (const auto& op : block.ops)
            if (op.id == id)
                return &op;
    return nullptr;
}

std::string population_symbol(std::string_view component_id)
{
    return "pop:" + std::string(component_id);
}

std::string pool_symbol(std::string_view component_id)
{
    return "pool:" + std::string(component_id);
}

std::string param_symbol(std::string_view owner, std::string_view field)
{
    return std::string(owner) + "." + std::string(field);
}

std::vector<std::string> check_program(const SimulationProgram& program)
{
    std::vector<std::string> problems;

    for (const auto& e : program.asg) {
        if (!program.symbols.count(e.symbol))
            problems.push_back("ASG edge from op " + std::to_string(e.op) + " names unknown symbol " + e.symbol);
        if (!program.find_op(e.op))
            problems.push_back("ASG edge names unknown op " + std::to_string(e.op));
    }

    std::vector<int> all;
    for (const auto& op : program.init)
        all.push_back(op.id);
    for (const auto& block : program.phases)
        for (const auto& op : block.ops)
            all.push_back(op.id);
    std::multiset<int> scheduled(program.schedule.begin(), program.schedule.end());
    for (int id : all)
        if (scheduled.count(id) != 1)
            problems.push_back("op " + std::to_string(id) + " scheduled " + std::to_string(scheduled.count(id)) +
                               " times");
    if (scheduled.size() != all.size())
        problems.push_back("schedule length differs from op count");

    if (program.phases.size() != kPhaseOrder.size()) {
        problems.push_back("program does not list all six phases");
    } else {
        for (std::size_t i = 0; i < kPhaseOrder.size(); ++i)
            if (program.phases[i].phase != kPhaseOrder[i])
                problems.push_back("phase " + std::to_string(i) + " out of order");
    }

    // Tick ops must appear in the schedule with non-decreasing phase rank, so no
    // interaction can run before metabolism within a tick.
    std::map<int, int> rank;
    for (std::size_t i = 0; i < program.phases.size(); ++i)
        for (const auto& op : program.phases[i].ops)
            rank[op.id] = static_cast<int>(program.phases[i].phase);
    int last = -1;
    bool seen_tick = false;
    for (int id : program.schedule) {
        auto it = rank.find(id);
        if (it == rank.end()) {
            if (seen_tick)
                problems.push_back("init op " + std::to_string(id) + " scheduled after tick ops");
            continue;
        }
        seen_tick = true;
        if (it->second < last)
            problems.push_back("op " + std::to_string(id) + " scheduled before an earlier phase");
        last = std::max(last, it->second);
    }

    for (const auto& block : program.phases)
        for (const auto& op : block.ops)
            for (const auto& a : op.args)
                if (!program.symbols.count(a.symbol))
                    problems.push_back("op " + std::to_string(op.id) + " argument " + a.role + " unresolved");
    return problems;
}

namespace {

Json op_to_json(const Op& op)
{
    Json args = Json::array();
    for (const auto& a : op.args)
        args.push_back({{"role", a.role}, {"symbol", a.symbol}, {"access", a.access == Access::Read ? "R" : "W"}});
    return {{"id", op.id}, {"op", to_string(op.kind)}, {"group", op.group}, {"args", std::move(args)}};
}

} // namespace

Json program_to_json(const SimulationProgram& program)
{
    Json symbols = Json::object();
    for (const auto& [name, s] : program.symbols) {
        Json j = Json::object();
        switch (s.kind) {
        case SymbolKind::Population: j["kind"] = "population"; break;
        case SymbolKind::Pool: j["kind"] = "pool"; break;
        case SymbolKind::Parameter: j["kind"] = "parameter"; break;
        case SymbolKind::Constant: j["kind"] = "constant"; break;
        }
        if (s.kind == SymbolKind::Parameter || s.kind == SymbolKind::Constant)
            j["value"] = s.value;
        if (s.role)
            j["role"] = to_string(*s.role);
        symbols[name] = std::move(j);
    }
    Json init = Json::array();
    for (const auto& op : program.init)
        init.push_back(op_to_json(op));
    Json phases = Json::array();
    for (const auto& block : program.phases) {
        Json ops = Json::array();
        for (const auto& op : block.ops)
            ops.push_back(op_to_json(op));
        phases.push_back({{"phase", to_string(block.phase)}, {"ops", std::move(ops)}});
    }
    Json asg = Json::array();
    for (const auto& e : program.asg)
        asg.push_back({{"op", e.op}, {"symbol", e.symbol}, {"access", e.access == Access::Read ? "R" : "W"}});
    return {{"name", program.name},     {"symbols", std::move(symbols)}, {"init", std::move(init)},
            {"phases", std::move(phases)}, {"asg", std::move(asg)},       {"schedule", program.schedule}};
}

} // namespace ecoforge::ir
