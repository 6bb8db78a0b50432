// Sweeps the kudzu bug's starting population over a grid of levels, classifies
// each run's outcome at the final month, and optionally pins three levels as
// the bundled low/medium/high configurations.
//
//   ecoforge_calibrate --model data/models/kudzu.json \
//       --levels 0,25,50,100,200,400,800,1600 --seeds 20 --months 120
//   ecoforge_calibrate --model data/models/kudzu.json --pin 25,300,1600 --out-dir data/models
#include "ecoforge/compiler.hpp"
#include "ecoforge/engine.hpp"
#include "ecoforge/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

using namespace ecoforge;

namespace {

struct Outcome {
    int exclusion = 0;   // hornbeam extinct, kudzu alive
    int coexistence = 0; // both plants alive
    int collapse = 0;    // both plants extinct
    int other = 0;       // kudzu extinct, hornbeam alive
    int overflow = 0;    // hit the agent cap
    double kudzu = 0;
    double hornbeam = 0;
    double bugs = 0;
};

ConceptualModel with_bugs(ConceptualModel model, const std::string& bug_id, double level)
{
    for (auto& c : model.components)
        if (c.id == bug_id)
            std::get<BioticProperties>(c.properties).starting_population = level;
    return model;
}

Outcome evaluate(const ConceptualModel& model, int seeds, std::int64_t months, std::optional<std::size_t> cap,
                 const std::string& kudzu_id, const std::string& hornbeam_id, const std::string& bug_id)
{
    auto program = compiler::compile_for_engine(compiler::compile(model));
    auto index = [&](const std::string& id) {
        for (std::size_t i = 0; i < program.populations.size(); ++i)
            if (program.populations[i].label == id)
                return i;
        throw Error(ErrorCode::NotFound, "model has no population '" + id + "'", id);
    };
    const auto k = index(kudzu_id);
    const auto h = index(hornbeam_id);
    const auto b = index(bug_id);
    Outcome o;
    for (int s = 1; s <= seeds; ++s) {
        engine::SimConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(s);
        cfg.max_ticks = months;
        cfg.agent_cap = cap;
        engine::TimeSeries series;
        try {
            series = engine::run(program, cfg);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CapacityExceeded)
                throw;
            ++o.overflow;
            continue;
        }
        const auto& last = series.frames.back();
        const bool kudzu = last.counts[k] > 0;
        const bool hornbeam = last.counts[h] > 0;
        if (kudzu && hornbeam)
            ++o.coexistence;
        else if (kudzu)
            ++o.exclusion;
        else if (hornbeam)
            ++o.other;
        else
            ++o.collapse;
        o.kudzu += static_cast<double>(last.counts[k]) / seeds;
        o.hornbeam += static_cast<double>(last.counts[h]) / seeds;
        o.bugs += static_cast<double>(last.counts[b]) / seeds;
    }
    return o;
}

std::vector<double> parse_levels(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stod(item));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Calibrate the bundled kudzu bug levels"};
    std::string model_path = "data/models/kudzu.json";
    std::string levels_text = "0,25,50,100,150,200,300,400,600,800,1200,1600";
    std::string pin_text;
    std::string out_dir = "data/models";
    int seeds = 20;
    std::int64_t months = 120;
    std::size_t cap = 0;
    std::string kudzu_id = "kudzu";
    std::string hornbeam_id = "hornbeam";
    std::string bug_id = "bug";
    app.add_option("--model", model_path, "Base kudzu model");
    app.add_option("--levels", levels_text, "Comma-separated bug starting populations to sweep");
    app.add_option("--pin", pin_text, "low,medium,high levels to write as bundled configurations");
    app.add_option("--out-dir", out_dir, "Where pinned configurations are written");
    app.add_option("--seeds", seeds, "Seeds 1..N per level");
    app.add_option("--months", months, "Months per run");
    app.add_option("--agent-cap", cap, "Abandon runs that exceed this many agents (0 keeps the engine default)");
    CLI11_PARSE(app, argc, argv);
    const auto run_cap = cap == 0 ? std::nullopt : std::optional<std::size_t>(cap);

    try {
        std::ifstream in(model_path, std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        const auto base = parse_model(text.str());

        if (!pin_text.empty()) {
            auto levels = parse_levels(pin_text);
            if (levels.size() != 3) {
                std::cerr << "--pin needs exactly three levels\n";
                return 1;
            }
            const char* names[] = {"low", "medium", "high"};
            for (int i = 0; i < 3; ++i) {
                auto m = with_bugs(base, bug_id, levels[i]);
                m.name = base.name + " (" + names[i] + " bug level)";
                std::ofstream out(out_dir + "/kudzu_" + names[i] + ".json", std::ios::binary | std::ios::trunc);
                out << serialize_model(m);
            }
        }

        std::cout << std::setw(8) << "bugs" << std::setw(11) << "exclusion" << std::setw(13) << "coexistence"
                  << std::setw(10) << "collapse" << std::setw(8) << "other" << std::setw(10) << "kudzu"
                  << std::setw(10) << "hornbeam" << std::setw(8) << "bugs@T" << std::setw(10) << "overflow" << "\n";
        for (double level : parse_levels(pin_text.empty() ? levels_text : pin_text)) {
            auto o = evaluate(with_bugs(base, bug_id, level), seeds, months, run_cap, kudzu_id, hornbeam_id, bug_id);
            std::cout << std::setw(8) << std::fixed << std::setprecision(0) << level << std::defaultfloat
                      << std::setw(11) << o.exclusion << std::setw(13) << o.coexistence
                      << std::setw(10) << o.collapse << std::setw(8) << o.other << std::setw(10) << std::fixed
                      << std::setprecision(1) << o.kudzu << std::setw(10) << o.hornbeam << std::setw(8) << o.bugs
                      << std::defaultfloat << std::setw(10) << o.overflow << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
