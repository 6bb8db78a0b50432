#include "ecoforge/engine.hpp"
#include "ecoforge/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

namespace ecoforge::engine {

using compiler::EngineProgram;
using compiler::Instr;
using compiler::SlotKind;
using ir::OpKind;
using ir::Phase;

std::string_view to_string(Status status)
{
    switch (status) {
    case Status::Ready: return "Ready";
    case Status::Running: return "Running";
    case Status::Paused: return "Paused";
    case Status::Finished: return "Finished";
    }
    return "Ready";
}

std::optional<Command> command_from(std::string_view name)
{
    if (name == "start")
        return Command::Start;
    if (name == "stop")
        return Command::Stop;
    if (name == "reset")
        return Command::Reset;
    return std::nullopt;
}

void check_config(const SimConfig& cfg)
{
    if (cfg.grid_width < 1 || cfg.grid_height < 1)
        throw Error(ErrorCode::Schema, "grid dimensions must be at least 1", "grid");
    if (cfg.max_ticks < 0)
        throw Error(ErrorCode::Schema, "max_ticks must be non-negative", "max_ticks");
    if (cfg.snapshot_every < 1)
        throw Error(ErrorCode::Schema, "snapshot_every must be at least 1", "snapshot_every");
}

double SimState::total_carbon(std::size_t population) const
{
    double sum = 0;
    for (const auto& a : populations.at(population))
        sum += a.carbon;
    return sum;
}

double SimState::total_agent_carbon() const
{
    double sum = 0;
    for (std::size_t p = 0; p < populations.size(); ++p)
        sum += total_carbon(p);
    return sum;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap(double v, double extent)
{
    double r = v - extent * std::floor(v / extent);
    return r >= extent ? 0.0 : r;
}

struct Hook {
    const Instr* conversion;
    std::size_t residue; // index into SimState::residues
};

// Per-tick interpreter over one state.
class Machine {
public:
    Machine(const EngineProgram& prog, SimState& st) : prog_(prog), st_(st)
    {
        hooks_.resize(prog.populations.size());
        std::size_t residue = 0;
        for (const auto& in : prog.phase(Phase::Die))
            if (in.op == OpKind::Conversion)
                hooks_[in.subject.index].push_back({&in, residue++});
        if (st_.residues.size() != residue)
            st_.residues.assign(residue, 0.0);
        cap_ = st.config.agent_cap.value_or(prog.agent_cap);
        live_ = 0;
        for (const auto& pop : st_.populations)
            live_ += pop.size();
    }

    void init()
    {
        for (const auto& in : prog_.init) {
            if (in.op == OpKind::InitPool) {
                st_.pools[in.subject.index] = in.k[0];
                continue;
            }
            const auto pop = in.subject.index;
            auto& rng = stream_of(pop);
            const auto n = static_cast<std::uint64_t>(std::floor(in.k[0]));
            if (live_ + n > cap_)
                throw Error(ErrorCode::CapacityExceeded,
                            "starting agents exceed the cap of " + std::to_string(cap_), prog_.populations[pop].label);
            const auto age_bound = static_cast<std::uint64_t>(std::ceil(in.k[1]));
            for (std::uint64_t i = 0; i < n; ++i) {
                Agent a;
                a.x = rng.uniform() * width();
                a.y = rng.uniform() * height();
                a.age = st_.config.randomize_initial_age ? static_cast<std::int64_t>(rng.uniform_int(age_bound)) : 0;
                a.heading = in.k[3];
                a.carbon = in.k[2];
                add(pop, a);
            }
        }
    }

    void tick()
    {
        st_.ledger = {};
        run_move();
        run_metabolize();
        run_interact();
        run_reproduce();
        run_die();
        run_regrow();
        ++st_.tick;
        check_invariants();
    }

private:
    const EngineProgram& prog_;
    SimState& st_;
    std::vector<std::vector<Hook>> hooks_;
    std::uint64_t cap_ = 0;
    std::uint64_t live_ = 0;

    double width() const { return st_.config.grid_width; }
    double height() const { return st_.config.grid_height; }

    Rng& stream_of(std::uint32_t pop) { return st_.streams[prog_.populations[pop].stream]; }
    Rng& pool_stream(std::uint32_t pool) { return st_.streams[prog_.pools[pool].stream]; }

    std::size_t cell(const Agent& a) const
    {
        auto cx = static_cast<std::size_t>(a.x);
        auto cy = static_cast<std::size_t>(a.y);
        return cy * static_cast<std::size_t>(st_.config.grid_width) + cx;
    }

    void add(std::uint32_t pop, Agent a)
    {
        if (live_ + 1 > cap_)
            throw Error(ErrorCode::CapacityExceeded, "agent count exceeds the cap of " + std::to_string(cap_),
                        prog_.populations[pop].label);
        a.id = st_.next_id++;
        a.alive = true;
        st_.populations[pop].push_back(a);
        ++live_;
    }

    void kill(Agent& a)
    {
        a.alive = false;
        --live_;
    }

    void compact(std::uint32_t pop)
    {
        auto& v = st_.populations[pop];
        v.erase(std::remove_if(v.begin(), v.end(), [](const Agent& a) { return !a.alive; }), v.end());
    }

    void compact_all()
    {
        for (std::uint32_t p = 0; p < st_.populations.size(); ++p)
            compact(p);
    }

    std::uint64_t alive_count(std::uint32_t pop) const
    {
        std::uint64_t n = 0;
        for (const auto& a : st_.populations[pop])
            n += a.alive ? 1 : 0;
        return n;
    }

    // Death with on-death conversions; the agent's remaining carbon leaves the agents.
    void expire(std::uint32_t pop, std::size_t index)
    {
        Agent& a = st_.populations[pop][index];
        st_.ledger.died += a.carbon;
        kill(a);
        const double x = a.x;
        const double y = a.y;
        for (const auto& h : hooks_[pop]) {
            const Instr& c = *h.conversion;
            if (c.object.kind == SlotKind::Pool) {
                st_.pools[c.object.index] += c.k[0];
                continue;
            }
            if (!(c.k[1] > 0))
                continue;
            st_.residues[h.residue] += c.k[0];
            while (st_.residues[h.residue] >= c.k[1]) {
                st_.residues[h.residue] -= c.k[1];
                Agent child;
                child.x = x;
                child.y = y;
                child.heading = c.k[3];
                child.carbon = c.k[2];
                add(c.object.index, child);
                st_.ledger.spawned += c.k[2];
            }
        }
    }

    // ---- move

    void run_move()
    {
        for (const auto& in : prog_.phase(Phase::Move)) {
            auto& agents = st_.populations[in.subject.index];
            auto& rng = stream_of(in.subject.index);
            const double v = in.k[0];
            const double turn = in.k[1];
            for (auto& a : agents) {
                a.heading = wrap(a.heading + (2 * rng.uniform() - 1) * turn, 360.0);
                const double rad = a.heading * kPi / 180.0;
                a.x = wrap(a.x + v * std::sin(rad), width());
                a.y = wrap(a.y + v * std::cos(rad), height());
            }
        }
    }

    // ---- metabolize

    double light_factor(const Instr& in) const
    {
        double factor = 1.0;
        for (const auto& c : in.couplings) {
            if (!(c.initial_amount > 0))
                continue;
            factor *= std::clamp(st_.pools[c.pool] / c.initial_amount, 0.0, 2.0);
        }
        return factor;
    }

    void run_metabolize()
    {
        // photosynthesizers sharing a cell split its light
        std::vector<std::uint32_t> crowd;
        for (std::uint32_t p = 0; p < prog_.populations.size(); ++p) {
            if (!prog_.populations[p].photosynthetic)
                continue;
            if (crowd.empty())
                crowd.assign(static_cast<std::size_t>(st_.config.grid_width) * st_.config.grid_height, 0);
            for (const auto& a : st_.populations[p])
                ++crowd[cell(a)];
        }
        for (const auto& in : prog_.phase(Phase::Metabolize)) {
            auto& agents = st_.populations[in.subject.index];
            if (in.op == OpKind::Photosynthesize) {
                const double base = in.k[0] * light_factor(in);
                for (auto& a : agents) {
                    const double gain = base / crowd[cell(a)];
                    a.carbon += gain;
                    st_.ledger.photosynthesized += gain;
                }
            } else {
                for (auto& a : agents) {
                    const double r = std::min(in.k[0], a.carbon);
                    a.carbon -= r;
                    st_.ledger.respired += r;
                }
            }
        }
    }

    // ---- interact

    struct Group {
        const Instr* encounter = nullptr;
        const Instr* transfer = nullptr;
        const Instr* removal = nullptr;
        const Instr* emission = nullptr;
        const Instr* modifier = nullptr;
    };

    void run_interact()
    {
        const auto& ops = prog_.phase(Phase::Interact);
        for (std::size_t i = 0; i < ops.size();) {
            Group g;
            std::size_t j = i;
            for (; j < ops.size() && ops[j].group == ops[i].group; ++j) {
                switch (ops[j].op) {
                case OpKind::EncounterTest: g.encounter = &ops[j]; break;
                case OpKind::CarbonTransfer: g.transfer = &ops[j]; break;
                case OpKind::Removal: g.removal = &ops[j]; break;
                case OpKind::Emission: g.emission = &ops[j]; break;
                case OpKind::GrowthModifier: g.modifier = &ops[j]; break;
                default:
                    throw Error(ErrorCode::InvariantBreach,
                                "unexpected " + std::string(ir::to_string(ops[j].op)) + " in interact phase");
                }
            }
            if (g.emission)
                run_emission(*g.emission);
            else if (g.encounter)
                run_encounter(g);
            compact_all();
            i = j;
        }
    }

    // Live agents of `pop` within one cell (Chebyshev, toroidal) of `a`, ascending id.
    class CellIndex {
    public:
        CellIndex(const SimState& st, std::uint32_t pop, int w, int h) : w_(w), h_(h)
        {
            head_.assign(static_cast<std::size_t>(w) * h, -1);
            const auto& agents = st.populations[pop];
            next_.assign(agents.size(), -1);
            // insert in reverse so each chain lists indices ascending
            for (std::size_t k = agents.size(); k-- > 0;) {
                if (!agents[k].alive)
                    continue;
                auto c = static_cast<std::size_t>(static_cast<std::size_t>(agents[k].y) * w +
                                                  static_cast<std::size_t>(agents[k].x));
                next_[k] = head_[c];
                head_[c] = static_cast<std::int64_t>(k);
            }
        }

        void around(const Agent& a, const std::vector<Agent>& agents, std::vector<std::size_t>& out) const
        {
            out.clear();
            const int cx = static_cast<int>(a.x);
            const int cy = static_cast<int>(a.y);
            std::size_t cells[9];
            std::size_t ncells = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = ((cx + dx) % w_ + w_) % w_;
                    const int y = ((cy + dy) % h_ + h_) % h_;
                    const auto c = static_cast<std::size_t>(y) * w_ + x;
                    if (std::find(cells, cells + ncells, c) == cells + ncells)
                        cells[ncells++] = c;
                }
            for (std::size_t n = 0; n < ncells; ++n)
                for (auto k = head_[cells[n]]; k >= 0; k = next_[static_cast<std::size_t>(k)])
                    if (agents[static_cast<std::size_t>(k)].alive)
                        out.push_back(static_cast<std::size_t>(k));
            std::sort(out.begin(), out.end());
        }

    private:
        int w_;
        int h_;
        std::vector<std::int64_t> head_;
        std::vector<std::int64_t> next_;
    };

    void apply_to_agent(const Group& g, Agent* actor, std::uint32_t target_pop, std::size_t target_index)
    {
        Agent& t = st_.populations[target_pop][target_index];
        if (g.transfer) {
            const double taken = g.transfer->k[0] * t.carbon;
            t.carbon -= taken;
            st_.ledger.consumed_from_agents += taken;
            const double gained = g.transfer->k[1] * taken;
            if (actor)
                actor->carbon += gained;
            st_.ledger.assimilated += gained;
            if (t.carbon <= 0) {
                st_.ledger.died += t.carbon;
                kill(t);
            }
        } else if (g.removal) {
            const double lost = g.removal->k[0] * t.carbon;
            t.carbon -= lost;
            st_.ledger.destroyed += lost;
            if (t.carbon <= 0)
                expire(target_pop, target_index);
        } else if (g.modifier) {
            const double before = t.carbon;
            t.carbon = before * (1 + g.modifier->k[0]);
            st_.ledger.affected += t.carbon - before;
        }
    }

    void apply_to_pool(const Group& g, Agent* actor, std::uint32_t pool)
    {
        double& amount = st_.pools[pool];
        const double minimum = prog_.pools[pool].minimum_amount;
        if (g.transfer) {
            const double taken = std::max(0.0, std::min(g.transfer->k[0], amount - minimum));
            amount -= taken;
            st_.ledger.consumed_from_pools += taken;
            const double gained = g.transfer->k[1] * taken;
            if (actor)
                actor->carbon += gained;
            st_.ledger.assimilated += gained;
        } else if (g.removal) {
            amount -= g.removal->k[0] * std::max(0.0, amount - minimum);
        } else if (g.modifier) {
            amount = std::max(minimum, amount * (1 + g.modifier->k[0]));
        }
    }

    void run_encounter(const Group& g)
    {
        const Instr& enc = *g.encounter;
        const double p = enc.k[0];
        const double refuge = enc.k[1];
        const std::uint32_t tgt = enc.object.index;

        if (enc.subject.kind == SlotKind::Agents && enc.object.kind == SlotKind::Agents) {
            const std::uint32_t src = enc.subject.index;
            auto& rng = stream_of(src);
            CellIndex index(st_, tgt, st_.config.grid_width, st_.config.grid_height);
            std::uint64_t remaining = alive_count(tgt);
            std::vector<std::size_t> candidates;
            const std::size_t actors = st_.populations[src].size();
            for (std::size_t k = 0; k < actors; ++k) {
                Agent& actor = st_.populations[src][k];
                if (!actor.alive)
                    continue;
                if (refuge >= 0 && static_cast<double>(remaining) <= refuge)
                    continue;
                index.around(actor, st_.populations[tgt], candidates);
                if (candidates.empty())
                    continue;
                const auto pick = candidates[rng.uniform_int(candidates.size())];
                if (!rng.bernoulli(p))
                    continue;
                apply_to_agent(g, &actor, tgt, pick);
                if (!st_.populations[tgt][pick].alive)
                    --remaining;
            }
        } else if (enc.subject.kind == SlotKind::Agents) {
            const std::uint32_t src = enc.subject.index;
            auto& rng = stream_of(src);
            const std::size_t actors = st_.populations[src].size();
            for (std::size_t k = 0; k < actors; ++k) {
                Agent& actor = st_.populations[src][k];
                if (!actor.alive || !rng.bernoulli(p))
                    continue;
                apply_to_pool(g, &actor, tgt);
            }
        } else if (enc.object.kind == SlotKind::Agents) {
            // a pool acts on every agent of the target, drawing on the target's stream
            auto& rng = stream_of(tgt);
            std::uint64_t remaining = alive_count(tgt);
            const std::size_t n = st_.populations[tgt].size();
            for (std::size_t k = 0; k < n; ++k) {
                if (!st_.populations[tgt][k].alive)
                    continue;
                if (refuge >= 0 && static_cast<double>(remaining) <= refuge)
                    continue;
                if (!rng.bernoulli(p))
                    continue;
                apply_to_agent(g, nullptr, tgt, k);
                if (!st_.populations[tgt][k].alive)
                    --remaining;
            }
        } else {
            if (pool_stream(enc.subject.index).bernoulli(p))
                apply_to_pool(g, nullptr, tgt);
        }
    }

    void run_emission(const Instr& in)
    {
        const std::uint32_t src = in.subject.index;
        auto& rng = stream_of(src);
        const std::size_t actors = st_.populations[src].size();
        for (std::size_t k = 0; k < actors; ++k) {
            if (!st_.populations[src][k].alive)
                continue;
            const std::uint64_t n = rng.poisson(in.k[0]);
            if (in.object.kind == SlotKind::Pool) {
                st_.pools[in.object.index] += static_cast<double>(n);
                continue;
            }
            for (std::uint64_t c = 0; c < n; ++c) {
                const Agent& parent = st_.populations[src][k];
                Agent child;
                child.x = parent.x;
                child.y = parent.y;
                child.heading = in.k[2];
                child.carbon = in.k[1];
                add(in.object.index, child);
                st_.ledger.spawned += in.k[1];
            }
        }
    }

    // ---- reproduce

    void run_reproduce()
    {
        for (const auto& in : prog_.phase(Phase::Reproduce)) {
            const std::uint32_t pop = in.subject.index;
            auto& rng = stream_of(pop);
            const auto maturity = std::llround(in.k[0]);
            const auto interval = std::max<long long>(1, std::llround(in.k[1]));
            const double whole = std::floor(in.k[2]);
            const double frac = in.k[2] - whole;
            const bool stationary = in.k[4] != 0;
            const std::size_t n = st_.populations[pop].size();
            for (std::size_t k = 0; k < n; ++k) {
                const Agent parent = st_.populations[pop][k];
                if (!(parent.carbon > 0) || parent.age < maturity || (parent.age - maturity) % interval != 0)
                    continue;
                auto brood = static_cast<std::uint64_t>(whole);
                if (frac > 0 && rng.bernoulli(frac))
                    ++brood;
                if (brood == 0)
                    continue;
                const double endowment = in.k[3] * parent.carbon;
                st_.populations[pop][k].carbon -= endowment;
                const double share = endowment / static_cast<double>(brood);
                for (std::uint64_t c = 0; c < brood; ++c) {
                    Agent child;
                    child.x = parent.x;
                    child.y = parent.y;
                    child.heading = parent.heading;
                    child.carbon = share;
                    if (stationary) {
                        const double dx = static_cast<double>(rng.uniform_int(3)) - 1;
                        const double dy = static_cast<double>(rng.uniform_int(3)) - 1;
                        child.x = wrap(parent.x + dx, width());
                        child.y = wrap(parent.y + dy, height());
                    }
                    add(pop, child);
                }
            }
        }
    }

    // ---- die

    void run_die()
    {
        for (const auto& in : prog_.phase(Phase::Die)) {
            if (in.op != OpKind::Die)
                continue;
            const std::uint32_t pop = in.subject.index;
            const std::size_t n = st_.populations[pop].size();
            for (std::size_t k = 0; k < n; ++k) {
                Agent& a = st_.populations[pop][k];
                if (!a.alive)
                    continue;
                a.age += 1;
                if (static_cast<double>(a.age) >= in.k[0] || a.carbon <= 0)
                    expire(pop, k);
            }
            compact_all();
        }
    }

    // ---- regrow

    void run_regrow()
    {
        for (const auto& in : prog_.phase(Phase::Regrow))
            st_.pools[in.subject.index] = std::max(in.k[1], st_.pools[in.subject.index] + in.k[0]);
    }

    void check_invariants() const
    {
        for (std::size_t p = 0; p < st_.populations.size(); ++p)
            for (const auto& a : st_.populations[p])
                if (!a.alive || !(a.carbon >= 0) || !std::isfinite(a.carbon))
                    throw Error(ErrorCode::InvariantBreach,
                                "agent " + std::to_string(a.id) + " has invalid carbon " + format_number(a.carbon),
                                prog_.populations[p].label);
        for (std::size_t p = 0; p < st_.pools.size(); ++p)
            if (!(st_.pools[p] >= prog_.pools[p].minimum_amount) || !std::isfinite(st_.pools[p]))
                throw Error(ErrorCode::InvariantBreach, "pool below its minimum", prog_.pools[p].label);
    }
};

} // namespace

SimState init_run(const EngineProgram& program, const SimConfig& cfg)
{
    check_config(cfg);
    SimState st;
    st.config = cfg;
    st.populations.resize(program.populations.size());
    st.pools.assign(program.pools.size(), 0.0);
    std::uint32_t streams = 0;
    for (const auto& p : program.populations)
        streams = std::max(streams, p.stream + 1);
    for (const auto& p : program.pools)
        streams = std::max(streams, p.stream + 1);
    for (std::uint32_t k = 0; k < streams; ++k)
        st.streams.push_back(Rng::stream(cfg.seed, k));
    Machine m(program, st);
    m.init();
    if (st.config.max_ticks == 0 || should_finish(st))
        st.status = Status::Finished;
    return st;
}

bool should_finish(const SimState& state)
{
    if (state.tick >= state.config.max_ticks)
        return true;
    if (state.populations.empty())
        return false;
    return std::all_of(state.populations.begin(), state.populations.end(),
                       [](const auto& pop) { return pop.empty(); });
}

SimFrame snapshot(const SimState& state)
{
    SimFrame f;
    f.tick = state.tick;
    for (std::size_t p = 0; p < state.populations.size(); ++p) {
        f.counts.push_back(state.count(p));
        f.carbon.push_back(state.total_carbon(p));
    }
    f.pools = state.pools;
    return f;
}

SimFrame step(const EngineProgram& program, SimState& state)
{
    if (state.status == Status::Finished)
        throw Error(ErrorCode::IllegalTransition, "simulation is finished", "step");
    Machine m(program, state);
    m.tick();
    if (should_finish(state))
        state.status = Status::Finished;
    return snapshot(state);
}

void control(const EngineProgram& program, SimState& state, Command command)
{
    switch (command) {
    case Command::Start:
        if (state.status != Status::Ready && state.status != Status::Paused)
            throw Error(ErrorCode::IllegalTransition,
                        "cannot start from " + std::string(to_string(state.status)), "start");
        state.status = Status::Running;
        return;
    case Command::Stop:
        if (state.status != Status::Running)
            throw Error(ErrorCode::IllegalTransition,
                        "cannot stop from " + std::string(to_string(state.status)), "stop");
        state.status = Status::Paused;
        return;
    case Command::Reset:
        state = init_run(program, state.config);
        return;
    }
}

TimeSeries run(const EngineProgram& program, const SimConfig& cfg)
{
    TimeSeries ts;
    ts.config = cfg;
    for (const auto& p : program.populations)
        ts.populations.push_back(p.label);
    for (const auto& p : program.pools)
        ts.pools.push_back(p.label);
    SimState st = init_run(program, cfg);
    ts.frames.push_back(snapshot(st));
    while (st.status != Status::Finished) {
        SimFrame f = step(program, st);
        if (f.tick % cfg.snapshot_every == 0)
            ts.frames.push_back(std::move(f));
    }
    ts.status = st.status;
    return ts;
}

std::uint64_t digest(const SimState& state)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    auto mixd = [&](double d) { mix(std::bit_cast<std::uint64_t>(d)); };
    mix(static_cast<std::uint64_t>(state.tick));
    mix(state.next_id);
    for (const auto& pop : state.populations) {
        mix(pop.size());
        for (const auto& a : pop) {
            mix(a.id);
            mixd(a.x);
            mixd(a.y);
            mixd(a.heading);
            mixd(a.carbon);
            mix(static_cast<std::uint64_t>(a.age));
        }
    }
    for (double p : state.pools)
        mixd(p);
    for (double r : state.residues)
        mixd(r);
    for (const auto& rng : state.streams)
        for (auto w : rng.state())
            mix(w);
    return h;
}

namespace {

std::string header_from(const std::vector<std::string>& pops, const std::vector<std::string>& pools)
{
    std::string h = "tick";
    for (const auto& p : pops)
        h += "," + p + "_count," + p + "_carbon";
    for (const auto& p : pools)
        h += "," + p + "_amount";
    return h + "\n";
}

} // namespace

std::string csv_header(const EngineProgram& program)
{
    std::vector<std::string> pops;
    std::vector<std::string> pools;
    for (const auto& p : program.populations)
        pops.push_back(p.label);
    for (const auto& p : program.pools)
        pools.push_back(p.label);
    return header_from(pops, pools);
}

std::string csv_row(const SimFrame& frame)
{
    std::string row = std::to_string(frame.tick);
    for (std::size_t p = 0; p < frame.counts.size(); ++p)
        row += "," + std::to_string(frame.counts[p]) + "," + format_number(frame.carbon[p]);
    for (double a : frame.pools)
        row += "," + format_number(a);
    return row + "\n";
}

std::string to_csv(const TimeSeries& series)
{
    std::string out = header_from(series.populations, series.pools);
    for (const auto& f : series.frames)
        out += csv_row(f);
    return out;
}

Json frame_to_json(const EngineProgram& program, const SimFrame& frame)
{
    Json counts = Json::object();
    Json carbon = Json::object();
    Json pools = Json::object();
    for (std::size_t p = 0; p < frame.counts.size(); ++p) {
        counts[program.populations[p].label] = frame.counts[p];
        carbon[program.populations[p].label] = frame.carbon[p];
    }
    for (std::size_t p = 0; p < frame.pools.size(); ++p)
        pools[program.pools[p].label] = frame.pools[p];
    return {{"tick", frame.tick}, {"counts", std::move(counts)}, {"carbon", std::move(carbon)}, {"pools", std::move(pools)}};
}

Json series_to_json(const TimeSeries& series)
{
    Json frames = Json::array();
    for (const auto& f : series.frames) {
        Json j = {{"tick", f.tick}, {"counts", f.counts}, {"carbon", f.carbon}, {"pools", f.pools}};
        frames.push_back(std::move(j));
    }
    return {{"config",
             {{"seed", series.config.seed},
              {"grid_width", series.config.grid_width},
              {"grid_height", series.config.grid_height},
              {"max_ticks", series.config.max_ticks},
              {"snapshot_every", series.config.snapshot_every}}},
            {"populations", series.populations},
            {"pools", series.pools},
            {"frames", std::move(frames)},
            {"status", to_string(series.status)}};
}

} // namespace ecoforge::engine
