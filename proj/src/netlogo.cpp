#include "ecoforge/compiler.hpp"
#include "ecoforge/error.hpp"
#include "ecoforge/netlogo_check.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace ecoforge::compiler {

using namespace ecoforge::ir;

namespace {

std::string num(double v)
{
    return format_number(v);
}

// NetLogo-facing names for one component.
struct Entity {
    std::string id;
    std::string label;
    bool biotic = false;
    std::string singular; // breed singular, or the global for a pool
    std::string plural;
};

class Emitter {
public:
    explicit Emitter(const SimulationProgram& prog) : prog_(prog) { name_entities(); }

    std::string run()
    {
        header();
        declarations();
        setup();
        go();
        move();
        metabolize();
        interact();
        reproduce();
        death();
        regrow();
        helpers();
        return out_.str();
    }

private:
    const SimulationProgram& prog_;
    std::ostringstream out_;
    std::vector<Entity> entities_;
    std::map<std::string, std::size_t> by_symbol_;
    std::set<std::string> taken_;
    std::vector<std::string> residues_;           // conversion buffers, one global per biotic conversion
    std::map<int, std::string> residue_of_;        // conversion op id -> buffer global
    std::map<std::string, std::string> eat_names_; // relationship id -> procedure
    std::ostringstream procs_;                     // eat and on-death procedures, emitted last

    std::string claim(std::string base)
    {
        if (base.empty() || std::isdigit(static_cast<unsigned char>(base[0])))
            base = "c-" + base;
        std::string name = base;
        for (int n = 2; taken_.count(name) || netlogo::is_primitive(name); ++n)
            name = base + "-" + std::to_string(n);
        taken_.insert(name);
        return name;
    }

    void name_entities()
    {
        for (const char* reserved : {"setup", "go", "move-agents", "metabolize", "interact", "reproduce",
                                     "check-death", "regrow", "energy", "age", "light-factor", "crowd"})
            taken_.insert(reserved);
        for (std::size_t i = 0; i < prog_.components.size(); ++i) {
            Entity e;
            e.id = prog_.components[i];
            e.label = prog_.labels.at(i);
            e.biotic = prog_.symbols.count(population_symbol(e.id)) > 0;
            std::string slug = netlogo::slugify(e.label.empty() ? e.id : e.label);
            if (e.biotic) {
                std::string base = slug;
                if (base.empty() || std::isdigit(static_cast<unsigned char>(base[0])))
                    base = "c-" + base;
                for (int n = 1;; ++n) {
                    std::string s = n == 1 ? base : base + "-" + std::to_string(n);
                    std::string p = netlogo::pluralize(s);
                    if (!taken_.count(s) && !taken_.count(p) && !netlogo::is_primitive(s) &&
                        !netlogo::is_primitive(p)) {
                        e.singular = s;
                        e.plural = p;
                        taken_.insert(s);
                        taken_.insert(p);
                        break;
                    }
                }
                by_symbol_[population_symbol(e.id)] = entities_.size();
            } else {
                e.singular = claim(slug);
                e.plural = claim(e.singular + "-initial");
                by_symbol_[pool_symbol(e.id)] = entities_.size();
            }
            entities_.push_back(std::move(e));
        }
    }

    const Entity& entity(const Op& op, std::string_view role) const
    {
        return entities_.at(by_symbol_.at(op.arg(role)->symbol));
    }

    double value(const Op& op, std::string_view role) const { return prog_.value(op.arg(role)->symbol); }

    bool has(const Op& op, std::string_view role) const { return op.arg(role) != nullptr; }

    std::vector<const Entity*> photosynthetic() const
    {
        std::vector<const Entity*> out;
        for (const auto& op : prog_.phase(Phase::Metabolize).ops)
            if (op.kind == OpKind::Photosynthesize)
                out.push_back(&entity(op, "population"));
        return out;
    }

    void header()
    {
        std::string name = prog_.name;
        for (char& c : name)
            if (c == '\n' || c == '\r')
                c = ' ';
        out_ << "; " << name << "\n";
        out_ << "; generated by ecoforge from the conceptual model; one tick is one month\n\n";
    }

    void declarations()
    {
        for (const auto& e : entities_)
            if (e.biotic)
                out_ << "breed [" << e.plural << " " << e.singular << "]\n";
        for (const auto& op : prog_.phase(Phase::Die).ops)
            if (op.kind == OpKind::Conversion && has(op, "target_body_mass")) {
                std::string g = claim(netlogo::slugify(op.group) + "-residue");
                residues_.push_back(g);
                residue_of_[op.id] = g;
            }
        std::vector<std::string> globals;
        for (const auto& e : entities_)
            if (!e.biotic) {
                globals.push_back(e.singular);
                globals.push_back(e.plural);
            }
        globals.insert(globals.end(), residues_.begin(), residues_.end());
        if (!globals.empty()) {
            out_ << "\nglobals [\n";
            for (const auto& g : globals)
                out_ << "  " << g << "\n";
            out_ << "]\n";
        }
        out_ << "\n; energy is carbon biomass in kg, age is months\n";
        out_ << "turtles-own [energy age]\n";
    }

    void setup()
    {
        out_ << "\nto setup\n  clear-all\n";
        for (const auto& op : prog_.init) {
            if (op.kind == OpKind::InitPool) {
                const auto& e = entity(op, "pool");
                out_ << "  set " << e.singular << " " << num(value(op, "amount")) << "\n";
                out_ << "  set " << e.plural << " " << num(value(op, "amount")) << "\n";
            } else {
                const auto& e = entity(op, "population");
                out_ << "  create-" << e.plural << " " << num(std::floor(value(op, "count"))) << " [\n";
                out_ << "    setxy random-xcor random-ycor\n";
                out_ << "    set heading " << num(value(op, "heading")) << "\n";
                out_ << "    set energy " << num(value(op, "carbon")) << "\n";
                out_ << "    set age random " << num(std::ceil(value(op, "lifespan"))) << "\n";
                out_ << "  ]\n";
            }
        }
        for (const auto& g : residues_)
            out_ << "  set " << g << " 0\n";
        out_ << "  reset-ticks\nend\n";
    }

    void go()
    {
        out_ << "\nto go\n";
        if (!prog_.populations.empty())
            out_ << "  if not any? turtles [ stop ]\n";
        out_ << "  move-agents\n  metabolize\n  interact\n  reproduce\n  check-death\n  regrow\n  tick\nend\n";
    }

    void move()
    {
        out_ << "\nto move-agents\n";
        for (const auto& op : prog_.phase(Phase::Move).ops) {
            const auto& e = entity(op, "population");
            double v = value(op, "velocity");
            double turn = value(op, "max_turn");
            out_ << "  ask " << e.plural << " [\n";
            out_ << "    set heading (heading + (random-float " << num(2 * turn) << ") - " << num(turn)
                 << ") mod 360\n";
            out_ << "    setxy (xcor + " << num(v) << " * sin heading) (ycor + " << num(v) << " * cos heading)\n";
            out_ << "  ]\n";
        }
        out_ << "end\n";
    }

    void metabolize()
    {
        out_ << "\nto metabolize\n";
        auto plants = photosynthetic();
        std::string crowd = "count (turtle-set";
        for (const auto* p : plants)
            crowd += " " + p->plural + "-here";
        crowd += ")";
        for (const auto& op : prog_.phase(Phase::Metabolize).ops) {
            const auto& e = entity(op, "population");
            if (op.kind == OpKind::Photosynthesize) {
                out_ << "  ask " << e.plural << " [\n";
                out_ << "    let light-factor 1\n";
                auto lights = op.args_for("light");
                auto initials = op.args_for("light_initial");
                for (std::size_t i = 0; i < lights.size(); ++i) {
                    if (prog_.value(initials[i]->symbol) <= 0)
                        continue;
                    const auto& pool = entities_.at(by_symbol_.at(lights[i]->symbol));
                    out_ << "    set light-factor light-factor * max list 0 (min list 2 (" << pool.singular << " / "
                         << pool.plural << "))\n";
                }
                out_ << "    set energy energy + " << num(value(op, "rate")) << " * light-factor / " << crowd << "\n";
                out_ << "  ]\n";
            } else {
                out_ << "  ask " << e.plural << " [ set energy max list 0 (energy - " << num(value(op, "rate"))
                     << ") ]\n";
            }
        }
        out_ << "end\n";
    }

    // Agents of `target` in the actor's cell or the eight around it.
    static std::string nearby(const Entity& target)
    {
        return "one-of (turtle-set " + target.plural + "-here " + target.plural + "-on neighbors)";
    }

    static std::string refuge_guard(const Op& encounter, const Entity& target, double refuge)
    {
        (void)encounter;
        return "count " + target.plural + " > " + num(refuge);
    }

    std::string death_call(const Entity& e) const
    {
        auto it = on_death_.find(e.id);
        return it == on_death_.end() ? "die" : it->second + " die";
    }

    std::map<std::string, std::string> on_death_; // component id -> hook procedure

    void interact()
    {
        // on-death hooks are named before interact so Destroys can call them
        for (const auto& op : prog_.phase(Phase::Die).ops)
            if (op.kind == OpKind::OnDeathHook) {
                const auto& e = entity(op, "source");
                if (!on_death_.count(e.id))
                    on_death_[e.id] = claim("on-death-" + e.singular);
            }

        out_ << "\nto interact\n";
        const auto& ops = prog_.phase(Phase::Interact).ops;
        for (std::size_t i = 0; i < ops.size();) {
            std::size_t j = i;
            std::map<OpKind, const Op*> group;
            while (j < ops.size() && ops[j].group == ops[i].group)
                group[ops[j].kind] = &ops[j], ++j;
            const std::string& rel = ops[i].group;
            if (group.count(OpKind::CarbonTransfer))
                consumes(rel, *group[OpKind::EncounterTest], *group[OpKind::CarbonTransfer]);
            else if (group.count(OpKind::Removal))
                destroys(*group[OpKind::EncounterTest], *group[OpKind::Removal]);
            else if (group.count(OpKind::Emission))
                produces(*group[OpKind::Emission]);
            else if (group.count(OpKind::GrowthModifier))
                affects(*group[OpKind::EncounterTest], *group[OpKind::GrowthModifier]);
            i = j;
        }
        out_ << "end\n";
    }

    void consumes(const std::string& rel, const Op& enc, const Op& transfer)
    {
        const auto& src = entity(transfer, "source");
        const auto& tgt = entity(transfer, "target");
        std::string proc = claim("eat-" + tgt.singular);
        eat_names_[rel] = proc;
        out_ << "  ask " << src.plural << " [ " << proc << " ]\n";

        double p = value(enc, "probability");
        double rate = value(transfer, "rate");
        double eff = value(transfer, "efficiency");
        procs_ << "\n; " << src.singular << " procedure\nto " << proc << "\n";
        if (tgt.biotic) {
            if (has(enc, "refuge"))
                procs_ << "  if not (" << refuge_guard(enc, tgt, value(enc, "refuge")) << ") [ stop ]\n";
            procs_ << "  let prey " << nearby(tgt) << "\n";
            procs_ << "  if prey != nobody and random-float 1 < " << num(p) << " [\n";
            procs_ << "    let taken " << num(rate) << " * [energy] of prey\n";
            procs_ << "    set energy energy + " << num(eff) << " * taken\n";
            procs_ << "    ask prey [\n";
            procs_ << "      set energy energy - taken\n";
            procs_ << "      if energy <= 0 [ die ]\n";
            procs_ << "    ]\n  ]\n";
        } else {
            double minimum = prog_.value(param_symbol(tgt.id, "minimum_amount"));
            procs_ << "  if random-float 1 < " << num(p) << " [\n";
            procs_ << "    let taken max list 0 (min list " << num(rate) << " (" << tgt.singular << " - "
                   << num(minimum) << "))\n";
            procs_ << "    set " << tgt.singular << " " << tgt.singular << " - taken\n";
            procs_ << "    set energy energy + " << num(eff) << " * taken\n";
            procs_ << "  ]\n";
        }
        procs_ << "end\n";
    }

    void destroys(const Op& enc, const Op& removal)
    {
        const auto& src = entity(enc, "source");
        const auto& tgt = entity(removal, "target");
        double p = value(enc, "probability");
        double frac = value(removal, "fraction");
        std::string guard = has(enc, "refuge") ? refuge_guard(enc, tgt, value(enc, "refuge")) + " and " : "";
        std::string hit = "set energy energy * (1 - " + num(frac) + ") if energy <= 0 [ " + death_call(tgt) + " ]";
        if (src.biotic && tgt.biotic) {
            out_ << "  ask " << src.plural << " [\n";
            out_ << "    let victim " << nearby(tgt) << "\n";
            out_ << "    if victim != nobody and " << guard << "random-float 1 < " << num(p) << " [ ask victim [ "
                 << hit << " ] ]\n";
            out_ << "  ]\n";
        } else if (tgt.biotic) {
            out_ << "  ask " << tgt.plural << " [ if " << guard << "random-float 1 < " << num(p) << " [ " << hit
                 << " ] ]\n";
        } else {
            double minimum = prog_.value(param_symbol(tgt.id, "minimum_amount"));
            out_ << "  ask " << src.plural << " [ if random-float 1 < " << num(p) << " [ set " << tgt.singular << " "
                 << tgt.singular << " - " << num(frac) << " * max list 0 (" << tgt.singular << " - " << num(minimum)
                 << ") ] ]\n";
        }
    }

    void produces(const Op& emission)
    {
        const auto& src = entity(emission, "source");
        const auto& tgt = entity(emission, "target");
        double rate = value(emission, "rate");
        if (tgt.biotic) {
            out_ << "  ask " << src.plural << " [ hatch-" << tgt.plural << " random-poisson " << num(rate)
                 << " [ set energy " << num(value(emission, "carbon")) << " set age 0 set heading "
                 << num(value(emission, "heading")) << " ] ]\n";
        } else {
            out_ << "  ask " << src.plural << " [ set " << tgt.singular << " " << tgt.singular << " + random-poisson "
                 << num(rate) << " ]\n";
        }
    }

    void affects(const Op& enc, const Op& modifier)
    {
        const auto& src = entity(enc, "source");
        const auto& tgt = entity(modifier, "target");
        double p = value(enc, "probability");
        std::string factor = "(1 + " + num(value(modifier, "modifier")) + ")";
        std::string pool_update;
        if (!tgt.biotic) {
            double minimum = prog_.value(param_symbol(tgt.id, "minimum_amount"));
            pool_update = "set " + tgt.singular + " max list " + num(minimum) + " (" + tgt.singular + " * " + factor +
                          ")";
        }
        if (src.biotic && tgt.biotic) {
            out_ << "  ask " << src.plural << " [\n";
            out_ << "    let partner " << nearby(tgt) << "\n";
            out_ << "    if partner != nobody and random-float 1 < " << num(p) << " [ ask partner [ set energy energy * "
                 << factor << " ] ]\n";
            out_ << "  ]\n";
        } else if (tgt.biotic) {
            out_ << "  ask " << tgt.plural << " [ if random-float 1 < " << num(p) << " [ set energy energy * " << factor
                 << " ] ]\n";
        } else if (src.biotic) {
            out_ << "  ask " << src.plural << " [ if random-float 1 < " << num(p) << " [ " << pool_update << " ] ]\n";
        } else {
            out_ << "  if random-float 1 < " << num(p) << " [ " << pool_update << " ]\n";
        }
    }

    void reproduce()
    {
        out_ << "\nto reproduce\n";
        for (const auto& op : prog_.phase(Phase::Reproduce).ops) {
            const auto& e = entity(op, "population");
            auto maturity = std::llround(value(op, "maturity"));
            auto interval = std::max<long long>(1, std::llround(value(op, "interval")));
            double offspring = value(op, "offspring");
            double whole = std::floor(offspring);
            double frac = offspring - whole;
            bool stationary = prog_.symbol(op.arg("population")->symbol).role == Role::DensityPool;
            out_ << "  ask " << e.plural << " [\n";
            out_ << "    if energy > 0 and age >= " << maturity << " and (age - " << maturity << ") mod " << interval
                 << " = 0 [\n";
            out_ << "      let brood " << num(whole);
            if (frac > 0)
                out_ << " + ifelse-value (random-float 1 < " << num(frac) << ") [ 1 ] [ 0 ]";
            out_ << "\n";
            out_ << "      if brood > 0 [\n";
            out_ << "        let endowment " << num(value(op, "fraction")) << " * energy\n";
            out_ << "        set energy energy - endowment\n";
            out_ << "        hatch brood [\n";
            out_ << "          set energy endowment / brood\n";
            out_ << "          set age 0\n";
            if (stationary)
                out_ << "          setxy (xcor + random 3 - 1) (ycor + random 3 - 1)\n";
            out_ << "        ]\n      ]\n    ]\n  ]\n";
        }
        out_ << "end\n";
    }

    void death()
    {
        out_ << "\nto check-death\n";
        for (const auto& op : prog_.phase(Phase::Die).ops) {
            if (op.kind != OpKind::Die)
                continue;
            const auto& e = entity(op, "population");
            out_ << "  ask " << e.plural << " [\n";
            out_ << "    set age age + 1\n";
            out_ << "    if age >= " << num(value(op, "lifespan")) << " or energy <= 0 [ " << death_call(e) << " ]\n";
            out_ << "  ]\n";
        }
        out_ << "end\n";

        // one hook procedure per population with conversions
        std::map<std::string, std::vector<const Op*>> conversions;
        for (const auto& op : prog_.phase(Phase::Die).ops)
            if (op.kind == OpKind::Conversion)
                conversions[entity(op, "source").id].push_back(&op);
        for (const auto& e : entities_) {
            auto it = on_death_.find(e.id);
            if (it == on_death_.end())
                continue;
            procs_ << "\n; " << e.singular << " procedure\nto " << it->second << "\n";
            for (const Op* op : conversions[e.id]) {
                const auto& tgt = entity(*op, "target");
                double mass = value(*op, "percent") * value(*op, "body_mass");
                if (!tgt.biotic) {
                    procs_ << "  set " << tgt.singular << " " << tgt.singular << " + " << num(mass) << "\n";
                    continue;
                }
                const std::string& buf = residue_of_.at(op->id);
                double tbm = value(*op, "target_body_mass");
                procs_ << "  set " << buf << " " << buf << " + " << num(mass) << "\n";
                procs_ << "  while [" << buf << " >= " << num(tbm) << "] [\n";
                procs_ << "    set " << buf << " " << buf << " - " << num(tbm) << "\n";
                procs_ << "    hatch-" << tgt.plural << " 1 [ set energy " << num(value(*op, "carbon"))
                       << " set age 0 set heading " << num(value(*op, "heading")) << " ]\n";
                procs_ << "  ]\n";
            }
            procs_ << "end\n";
        }
    }

    void regrow()
    {
        out_ << "\nto regrow\n";
        for (const auto& op : prog_.phase(Phase::Regrow).ops) {
            const auto& e = entity(op, "pool");
            out_ << "  set " << e.singular << " max list " << num(value(op, "minimum")) << " (" << e.singular << " + "
                 << num(value(op, "growth")) << ")\n";
        }
        out_ << "end\n";
    }

    void helpers() { out_ << procs_.str(); }
};

} // namespace

std::string emit_netlogo(const SimulationProgram& program)
{
    auto problems = check_program(program);
    if (!problems.empty())
        throw Error(ErrorCode::InvariantBreach, "invalid simulation program: " + problems.front());
    return Emitter(program).run();
}

} // namespace ecoforge::compiler
