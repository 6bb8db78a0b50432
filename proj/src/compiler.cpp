#include "ecoforge/compiler.hpp"
#include "ecoforge/data.hpp"
#include "ecoforge/error.hpp"

#include <cmath>
#include <map>

namespace ecoforge::compiler {

using namespace ecoforge::ir;

DomainModel build_domain_model(const ConceptualModel& model)
{
    DomainModel dm;
    dm.name = model.name;
    for (const auto& c : model.components) {
        Population p{c.id, c.label, Role::SubstancePool, c.properties};
        bool resolved = true;
        if (c.kind() == ComponentKind::Biotic) {
            const auto& b = c.biotic();
            for (const auto& f : kBioticFields)
                resolved = resolved && std::isfinite(b.*f.member);
            p.role = (b.photosynthesis_rate > 0 && b.move_velocity == 0) ? Role::DensityPool : Role::MobileAgent;
        } else {
            for (const auto& f : kAbioticFields)
                resolved = resolved && std::isfinite(c.abiotic().*f.member);
        }
        if (!resolved)
            throw Error(ErrorCode::UnresolvedProperties, "component '" + c.id + "' has unresolved properties", c.id);
        dm.populations.push_back(std::move(p));
    }
    for (const auto& r : model.relationships) {
        auto src = dm.index_of(r.source);
        auto tgt = dm.index_of(r.target);
        if (!src || !tgt)
            throw Error(ErrorCode::Validation, "relationship '" + r.id + "' has a dangling endpoint", r.id);
        dm.interactions.push_back({r.id, r.kind(), *src, *tgt, r.params});
    }
    return dm;
}

namespace {

class Lowering {
public:
    explicit Lowering(const DomainModel& dm) : dm_(dm) {}

    SimulationProgram run()
    {
        prog_.name = dm_.name;
        for (auto p : kPhaseOrder)
            prog_.phases.push_back({p, {}});
        declare_symbols();
        lower_init();
        lower_move();
        lower_metabolize();
        lower_interact();
        lower_reproduce();
        lower_die();
        lower_regrow();

        for (const auto& op : prog_.init)
            prog_.schedule.push_back(op.id);
        for (const auto& block : prog_.phases)
            for (const auto& op : block.ops)
                prog_.schedule.push_back(op.id);
        return std::move(prog_);
    }

private:
    const DomainModel& dm_;
    SimulationProgram prog_;
    int next_id_ = 0;

    static bool biotic(const Population& p) { return p.role != Role::SubstancePool; }

    std::string entity(std::size_t index) const
    {
        const auto& p = dm_.populations[index];
        return biotic(p) ? population_symbol(p.component_id) : pool_symbol(p.component_id);
    }

    std::string param(std::size_t index, std::string_view field) const
    {
        return param_symbol(dm_.populations[index].component_id, field);
    }

    void add_symbol(std::string name, SymbolKind kind, double value = 0, std::optional<Role> role = std::nullopt)
    {
        prog_.symbols[name] = Symbol{name, kind, value, role};
    }

    void declare_symbols()
    {
        for (const auto& p : dm_.populations) {
            prog_.components.push_back(p.component_id);
            prog_.labels.push_back(p.label);
            if (biotic(p)) {
                add_symbol(population_symbol(p.component_id), SymbolKind::Population, 0, p.role);
                prog_.populations.push_back(population_symbol(p.component_id));
                const auto& b = std::get<BioticProperties>(p.properties);
                for (const auto& f : kBioticFields)
                    add_symbol(param_symbol(p.component_id, f.name), SymbolKind::Parameter, b.*f.member);
            } else {
                add_symbol(pool_symbol(p.component_id), SymbolKind::Pool, 0, p.role);
                prog_.pools.push_back(pool_symbol(p.component_id));
                const auto& a = std::get<AbioticProperties>(p.properties);
                for (const auto& f : kAbioticFields)
                    add_symbol(param_symbol(p.component_id, f.name), SymbolKind::Parameter, a.*f.member);
            }
        }
        for (const auto& in : dm_.interactions) {
            prog_.relationships.push_back(in.relationship_id);
            std::visit(
                [&](const auto& params) {
                    using T = std::decay_t<decltype(params)>;
                    auto put = [&](std::string_view field, double v) {
                        add_symbol(param_symbol(in.relationship_id, field), SymbolKind::Parameter, v);
                    };
                    if constexpr (std::is_same_v<T, ConsumesParams>) {
                        put("consumption_rate", params.consumption_rate);
                        put("interaction_probability", params.interaction_probability);
                    } else if constexpr (std::is_same_v<T, DestroysParams>) {
                        put("destruction_rate", params.destruction_rate);
                        put("interaction_probability", params.interaction_probability);
                    } else if constexpr (std::is_same_v<T, ProducesParams>) {
                        put("production_rate", params.production_rate);
                    } else if constexpr (std::is_same_v<T, AffectsParams>) {
                        put("growth_rate_modifier", params.growth_rate_modifier);
                        put("interaction_probability", params.interaction_probability);
                    } else {
                        put("percent_body_mass", params.percent_body_mass);
                    }
                },
                in.params);
        }
        const Json& engine = data::table("engine.json");
        add_symbol("engine.offspring_carbon_fraction", SymbolKind::Constant,
                   engine.at("offspring_carbon_fraction").get<double>());
        add_symbol("engine.max_turn_degrees", SymbolKind::Constant, engine.at("max_turn_degrees").get<double>());
        add_symbol("engine.agent_cap", SymbolKind::Constant, engine.at("agent_cap").get<double>());
    }

    Op& emit(std::vector<Op>& into, OpKind kind, std::string group, std::vector<Arg> args)
    {
        Op op{next_id_++, kind, std::move(group), std::move(args)};
        for (const auto& a : op.args)
            prog_.asg.push_back({op.id, a.symbol, a.access});
        into.push_back(std::move(op));
        return into.back();
    }

    std::vector<Op>& block(Phase p) { return prog_.phases[static_cast<std::size_t>(p)].ops; }

    static Arg R(std::string role, std::string symbol) { return {std::move(role), std::move(symbol), Access::Read}; }
    static Arg W(std::string role, std::string symbol) { return {std::move(role), std::move(symbol), Access::Write}; }

    void lower_init()
    {
        for (std::size_t i = 0; i < dm_.populations.size(); ++i) {
            const auto& p = dm_.populations[i];
            if (biotic(p)) {
                emit(prog_.init, OpKind::Spawn, p.component_id,
                     {W("population", entity(i)), R("count", param(i, "starting_population")),
                      R("lifespan", param(i, "lifespan")), R("carbon", param(i, "carbon_biomass")),
                      R("heading", param(i, "move_direction"))});
            } else {
                emit(prog_.init, OpKind::InitPool, p.component_id,
                     {W("pool", entity(i)), R("amount", param(i, "amount"))});
            }
        }
    }

    void lower_move()
    {
        for (std::size_t i = 0; i < dm_.populations.size(); ++i) {
            const auto& p = dm_.populations[i];
            if (p.role != Role::MobileAgent)
                continue;
            emit(block(Phase::Move), OpKind::Move, p.component_id,
                 {W("population", entity(i)), R("velocity", param(i, "move_velocity")),
                  R("max_turn", "engine.max_turn_degrees")});
        }
    }

    void lower_metabolize()
    {
        for (std::size_t i = 0; i < dm_.populations.size(); ++i) {
            const auto& p = dm_.populations[i];
            if (!biotic(p))
                continue;
            const auto& b = std::get<BioticProperties>(p.properties);
            if (b.photosynthesis_rate > 0) {
                std::vector<Arg> args{W("population", entity(i)), R("rate", param(i, "photosynthesis_rate"))};
                // Affects edges from substance pools couple that pool's availability into growth.
                for (const auto& in : dm_.interactions) {
                    if (in.kind != RelationshipKind::Affects || in.target != i)
                        continue;
                    if (dm_.populations[in.source].role != Role::SubstancePool)
                        continue;
                    args.push_back(R("light", entity(in.source)));
                    args.push_back(R("light_initial", param(in.source, "amount")));
                }
                emit(block(Phase::Metabolize), OpKind::Photosynthesize, p.component_id, std::move(args));
            }
            emit(block(Phase::Metabolize), OpKind::Respire, p.component_id,
                 {W("population", entity(i)), R("rate", param(i, "respiratory_rate"))});
        }
    }

    void lower_interact()
    {
        auto& ops = block(Phase::Interact);
        for (const auto& in : dm_.interactions) {
            const std::string& g = in.relationship_id;
            const bool target_biotic = biotic(dm_.populations[in.target]);
            auto rel = [&](std::string_view field) { return param_symbol(g, field); };
            auto encounter = [&](bool refuge) {
                std::vector<Arg> args{R("source", entity(in.source)), R("target", entity(in.target)),
                                      R("probability", rel("interaction_probability"))};
                if (refuge && target_biotic)
                    args.push_back(R("refuge", param(in.target, "minimum_population")));
                emit(ops, OpKind::EncounterTest, g, std::move(args));
            };
            switch (in.kind) {
            case RelationshipKind::Consumes:
                encounter(true);
                emit(ops, OpKind::CarbonTransfer, g,
                     {W("source", entity(in.source)), W("target", entity(in.target)), R("rate", rel("consumption_rate")),
                      R("efficiency", param(in.source, "assimilation_efficiency"))});
                emit(ops, OpKind::Removal, g, {W("target", entity(in.target))});
                break;
            case RelationshipKind::Destroys:
                encounter(true);
                emit(ops, OpKind::Removal, g, {W("target", entity(in.target)), R("fraction", rel("destruction_rate"))});
                break;
            case RelationshipKind::Produces: {
                std::vector<Arg> args{R("source", entity(in.source)), W("target", entity(in.target)),
                                      R("rate", rel("production_rate"))};
                if (target_biotic) {
                    args.push_back(R("carbon", param(in.target, "carbon_biomass")));
                    args.push_back(R("heading", param(in.target, "move_direction")));
                }
                emit(ops, OpKind::Emission, g, std::move(args));
                break;
            }
            case RelationshipKind::Affects:
                encounter(false);
                emit(ops, OpKind::GrowthModifier, g,
                     {W("target", entity(in.target)), R("modifier", rel("growth_rate_modifier"))});
                break;
            case RelationshipKind::BecomesOnDeath:
                break; // lowered into the die phase
            }
        }
    }

    void lower_reproduce()
    {
        for (std::size_t i = 0; i < dm_.populations.size(); ++i) {
            if (!biotic(dm_.populations[i]))
                continue;
            emit(block(Phase::Reproduce), OpKind::Reproduce, dm_.populations[i].component_id,
                 {W("population", entity(i)), R("maturity", param(i, "reproductive_maturity")),
                  R("interval", param(i, "reproductive_interval")), R("offspring", param(i, "offspring_count")),
                  R("fraction", "engine.offspring_carbon_fraction")});
        }
    }

    void lower_die()
    {
        auto& ops = block(Phase::Die);
        for (std::size_t i = 0; i < dm_.populations.size(); ++i) {
            if (!biotic(dm_.populations[i]))
                continue;
            emit(ops, OpKind::Die, dm_.populations[i].component_id,
                 {W("population", entity(i)), R("lifespan", param(i, "lifespan"))});
            for (const auto& in : dm_.interactions) {
                if (in.kind != RelationshipKind::BecomesOnDeath || in.source != i)
                    continue;
                const std::string& g = in.relationship_id;
                emit(ops, OpKind::OnDeathHook, g, {R("source", entity(i))});
                std::vector<Arg> args{R("source", entity(i)), W("target", entity(in.target)),
                                      R("percent", param_symbol(g, "percent_body_mass")),
                                      R("body_mass", param(i, "body_mass"))};
                if (biotic(dm_.populations[in.target])) {
                    args.push_back(R("target_body_mass", param(in.target, "body_mass")));
                    args.push_back(R("carbon", param(in.target, "carbon_biomass")));
                    args.push_back(R("heading", param(in.target, "move_direction")));
                }
                emit(ops, OpKind::Conversion, g, std::move(args));
            }
        }
    }

    void lower_regrow()
    {
        for (std::size_t i = 0; i < dm_.populations.size(); ++i) {
            if (biotic(dm_.populations[i]))
                continue;
            emit(block(Phase::Regrow), OpKind::Regrow, dm_.populations[i].component_id,
                 {W("pool", entity(i)), R("growth", param(i, "growth_rate")),
                  R("minimum", param(i, "minimum_amount"))});
        }
    }
};

} // namespace

SimulationProgram lower_to_ir(const DomainModel& domain)
{
    return Lowering(domain).run();
}

SimulationProgram compile(const ConceptualModel& model)
{
    auto report = validate_model(model);
    if (!report.ok()) {
        std::string msg = "model has " + std::to_string(report.errors.size()) + " validation error(s)";
        for (const auto& e : report.errors)
            msg += "; " + e.code + " " + e.subject + (e.field.empty() ? "" : "." + e.field);
        throw Error(ErrorCode::Validation, msg, report.errors.front().subject);
    }
    return lower_to_ir(build_domain_model(model));
}

// ---------------------------------------------------------------------------
// engine lowering

namespace {

class EngineLowering {
public:
    explicit EngineLowering(const SimulationProgram& prog) : prog_(prog) {}

    EngineProgram run()
    {
        for (std::size_t i = 0; i < prog_.components.size(); ++i) {
            const auto& id = prog_.components[i];
            if (prog_.symbols.count(population_symbol(id))) {
                slots_[population_symbol(id)] = {SlotKind::Agents, static_cast<std::uint32_t>(out_.populations.size())};
                const auto& sym = prog_.symbol(population_symbol(id));
                out_.populations.push_back({id, *sym.role, static_cast<std::uint32_t>(i),
                                            prog_.value(param_symbol(id, "minimum_population")),
                                            prog_.value(param_symbol(id, "photosynthesis_rate")) > 0});
            } else {
                slots_[pool_symbol(id)] = {SlotKind::Pool, static_cast<std::uint32_t>(out_.pools.size())};
                out_.pools.push_back({id, static_cast<std::uint32_t>(i),
                                      prog_.value(param_symbol(id, "minimum_amount"))});
            }
        }
        for (std::size_t i = 0; i < prog_.relationships.size(); ++i)
            groups_[prog_.relationships[i]] = static_cast<std::uint32_t>(i + 1);
        out_.group_count = static_cast<std::uint32_t>(prog_.relationships.size());
        out_.agent_cap = static_cast<std::uint64_t>(prog_.value("engine.agent_cap"));

        for (const auto& op : prog_.init)
            out_.init.push_back(lower(op));
        for (std::size_t p = 0; p < prog_.phases.size(); ++p)
            for (const auto& op : prog_.phases[p].ops)
                out_.phases[static_cast<std::size_t>(prog_.phases[p].phase)].push_back(lower(op));
        return std::move(out_);
    }

private:
    const SimulationProgram& prog_;
    EngineProgram out_;
    std::map<std::string, Slot> slots_;
    std::map<std::string, std::uint32_t> groups_;

    Slot slot(const Op& op, std::string_view role) const
    {
        const Arg* a = op.arg(role);
        if (!a)
            return {};
        return slots_.at(a->symbol);
    }

    double num(const Op& op, std::string_view role) const
    {
        const Arg* a = op.arg(role);
        if (!a)
            throw Error(ErrorCode::InvariantBreach,
                        "op " + std::to_string(op.id) + " lacks argument '" + std::string(role) + "'");
        double v = prog_.value(a->symbol);
        if (!std::isfinite(v))
            throw Error(ErrorCode::InvariantBreach, "non-finite constant " + a->symbol, a->symbol);
        return v;
    }

    double num_or(const Op& op, std::string_view role, double fallback) const
    {
        return op.arg(role) ? num(op, role) : fallback;
    }

    Instr lower(const Op& op) const
    {
        Instr in;
        in.op = op.kind;
        if (auto it = groups_.find(op.group); it != groups_.end() && op.kind != OpKind::Spawn &&
                                              op.kind != OpKind::InitPool && op.kind != OpKind::Regrow)
            in.group = it->second;
        switch (op.kind) {
        case OpKind::Spawn:
            in.subject = slot(op, "population");
            in.k = {num(op, "count"), num(op, "lifespan"), num(op, "carbon"), num(op, "heading"), 0};
            break;
        case OpKind::InitPool:
            in.subject = slot(op, "pool");
            in.k[0] = num(op, "amount");
            break;
        case OpKind::Move:
            in.subject = slot(op, "population");
            in.k[0] = num(op, "velocity");
            in.k[1] = num(op, "max_turn");
            break;
        case OpKind::Photosynthesize: {
            in.subject = slot(op, "population");
            in.k[0] = num(op, "rate");
            auto lights = op.args_for("light");
            auto initials = op.args_for("light_initial");
            for (std::size_t i = 0; i < lights.size(); ++i)
                in.couplings.push_back({slots_.at(lights[i]->symbol).index, prog_.value(initials.at(i)->symbol)});
            break;
        }
        case OpKind::Respire:
            in.subject = slot(op, "population");
            in.k[0] = num(op, "rate");
            break;
        case OpKind::EncounterTest:
            in.subject = slot(op, "source");
            in.object = slot(op, "target");
            in.k[0] = num(op, "probability");
            in.k[1] = num_or(op, "refuge", -1);
            break;
        case OpKind::CarbonTransfer:
            in.subject = slot(op, "source");
            in.object = slot(op, "target");
            in.k[0] = num(op, "rate");
            in.k[1] = num(op, "efficiency");
            break;
        case OpKind::Removal:
            in.object = slot(op, "target");
            in.k[0] = num_or(op, "fraction", -1);
            break;
        case OpKind::Emission:
            in.subject = slot(op, "source");
            in.object = slot(op, "target");
            in.k[0] = num(op, "rate");
            in.k[1] = num_or(op, "carbon", 0);
            in.k[2] = num_or(op, "heading", 0);
            break;
        case OpKind::GrowthModifier:
            in.object = slot(op, "target");
            in.k[0] = num(op, "modifier");
            break;
        case OpKind::Reproduce: {
            in.subject = slot(op, "population");
            const auto& role = *prog_.symbol(op.arg("population")->symbol).role;
            in.k = {num(op, "maturity"), num(op, "interval"), num(op, "offspring"), num(op, "fraction"),
                    role == Role::DensityPool ? 1.0 : 0.0};
            break;
        }
        case OpKind::Die:
            in.subject = slot(op, "population");
            in.k[0] = num(op, "lifespan");
            break;
        case OpKind::OnDeathHook:
            in.subject = slot(op, "source");
            break;
        case OpKind::Conversion:
            in.subject = slot(op, "source");
            in.object = slot(op, "target");
            in.k = {num(op, "percent") * num(op, "body_mass"), num_or(op, "target_body_mass", 0),
                    num_or(op, "carbon", 0), num_or(op, "heading", 0), 0};
            break;
        case OpKind::Regrow:
            in.subject = slot(op, "pool");
            in.k[0] = num(op, "growth");
            in.k[1] = num(op, "minimum");
            break;
        }
        return in;
    }
};

Json slot_to_json(const Slot& s)
{
    switch (s.kind) {
    case SlotKind::None: return nullptr;
    case SlotKind::Agents: return {{"agents", s.index}};
    case SlotKind::Pool: return {{"pool", s.index}};
    }
    return nullptr;
}

Json instr_to_json(const Instr& in)
{
    Json j = {{"op", to_string(in.op)}, {"k", in.k}};
    if (in.group)
        j["group"] = in.group;
    if (in.subject.kind != SlotKind::None)
        j["subject"] = slot_to_json(in.subject);
    if (in.object.kind != SlotKind::None)
        j["object"] = slot_to_json(in.object);
    if (!in.couplings.empty()) {
        Json c = Json::array();
        for (const auto& cp : in.couplings)
            c.push_back({{"pool", cp.pool}, {"initial_amount", cp.initial_amount}});
        j["couplings"] = std::move(c);
    }
    return j;
}

} // namespace

EngineProgram compile_for_engine(const SimulationProgram& program)
{
    auto problems = check_program(program);
    if (!problems.empty())
        throw Error(ErrorCode::InvariantBreach, "invalid simulation program: " + problems.front());
    return EngineLowering(program).run();
}

Json engine_program_to_json(const EngineProgram& program)
{
    Json pops = Json::array();
    for (const auto& p : program.populations)
        pops.push_back({{"label", p.label},
                        {"role", to_string(p.role)},
                        {"stream", p.stream},
                        {"minimum_population", p.minimum_population},
                        {"photosynthetic", p.photosynthetic}});
    Json pools = Json::array();
    for (const auto& p : program.pools)
        pools.push_back({{"label", p.label}, {"stream", p.stream}, {"minimum_amount", p.minimum_amount}});
    Json init = Json::array();
    for (const auto& in : program.init)
        init.push_back(instr_to_json(in));
    Json phases = Json::object();
    for (auto p : kPhaseOrder) {
        Json list = Json::array();
        for (const auto& in : program.phase(p))
            list.push_back(instr_to_json(in));
        phases[std::string(to_string(p))] = std::move(list);
    }
    return {{"version", 1},
            {"populations", std::move(pops)},
            {"pools", std::move(pools)},
            {"init", std::move(init)},
            {"phases", std::move(phases)},
            {"groups", program.group_count},
            {"agent_cap", program.agent_cap}};
}

} // namespace ecoforge::compiler
