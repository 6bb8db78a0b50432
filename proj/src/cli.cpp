#include "ecoforge/cli.hpp"
#include "ecoforge/compiler.hpp"
#include "ecoforge/engine.hpp"
#include "ecoforge/error.hpp"
#include "ecoforge/ontology.hpp"
#include "ecoforge/service.hpp"
#include "ecoforge/traits.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ecoforge::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Syntax:
    case ErrorCode::Schema:
    case ErrorCode::Validation:
    case ErrorCode::EndpointKindMismatch:
    case ErrorCode::UnresolvedProperties:
    case ErrorCode::UnknownInteraction:
    case ErrorCode::MissingSign: return kValidation;
    case ErrorCode::EmptyQuery: return kUsage;
    default: return kRuntime;
    }
}

struct Diagnostics {
    std::ostream& err;
    bool json = false;

    void report(std::string_view code, const std::string& message, const std::string& subject) const
    {
        if (json) {
            err << compact_dump({{"level", "error"}, {"code", code}, {"message", message}, {"subject", subject}})
                << "\n";
        } else {
            err << "error: " << message;
            if (!subject.empty())
                err << " [" << subject << "]";
            err << "\n";
        }
    }
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read " + path, path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f)
        throw Error(ErrorCode::Io, "cannot write " + path, path);
}

// A path on disk, or the id of a model stored under ECOFORGE_DATA_DIR.
std::string resolve_model_path(const std::string& arg)
{
    if (fs::exists(arg))
        return arg;
    if (const char* dir = std::getenv("ECOFORGE_DATA_DIR"); dir && *dir) {
        auto stored = fs::path(dir) / "models" / (arg + ".json");
        if (fs::exists(stored))
            return stored.string();
    }
    return arg;
}

ConceptualModel load_model(const std::string& arg)
{
    return parse_model(read_file(resolve_model_path(arg)));
}

std::unique_ptr<traits::TraitBackend> backend_for(const std::string& spec)
{
    return spec.empty() ? traits::backend_from_env() : traits::make_backend(spec);
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Conceptual ecology models: validate, compile, simulate, look up species traits."};
    app.name("ecoforge");
    app.require_subcommand(1);
    app.set_version_flag("--version", "ecoforge 0.1.0");

    Diagnostics diag{err};
    std::string backend_spec;
    app.add_flag("--json", diag.json, "Single-line JSON diagnostics on stderr");
    app.add_option("--backend", backend_spec, "Trait backend: fixtures:<dir> or live:<url>")
        ->envname("ECOFORGE_TRAIT_BACKEND");

    std::string model_path;
    std::string output;

    auto* validate = app.add_subcommand("validate", "Check a model document and print its validation report");
    validate->add_option("model", model_path, "Model file")->required();

    auto* format = app.add_subcommand("format", "Rewrite a model document in canonical form");
    format->add_option("model", model_path, "Model file")->required();
    format->add_option("-o,--output", output, "Output path (stdout when omitted)");

    std::string target = "netlogo";
    auto* compile = app.add_subcommand("compile", "Compile a model to NetLogo source or an engine program");
    compile->add_option("model", model_path, "Model file")->required();
    compile->add_option("--target", target, "netlogo, engine or ir")
        ->check(CLI::IsMember({"netlogo", "engine", "ir"}));
    compile->add_option("-o,--output", output, "Output path (stdout when omitted)");

    std::int64_t months = 120;
    std::uint64_t seed = 0;
    std::int64_t snapshot_every = 1;
    std::string csv_path;
    std::string json_path;
    auto* simulate = app.add_subcommand("simulate", "Run the built-in engine and write the time series");
    simulate->add_option("model", model_path, "Model file")->required();
    simulate->add_option("--months", months, "Ticks to run")->check(CLI::NonNegativeNumber);
    simulate->add_option("--seed", seed, "PRNG seed");
    simulate->add_option("--snapshot-every", snapshot_every, "Frame spacing in ticks")->check(CLI::PositiveNumber);
    simulate->add_option("--csv", csv_path, "CSV output path (stdout when neither --csv nor --series-json)");
    simulate->add_option("--series-json", json_path, "Time series as JSON");

    std::string query;
    auto* lookup = app.add_subcommand("lookup", "Search taxa by scientific or common name");
    lookup->add_option("name", query, "Species name")->required();

    std::string taxon;
    auto* derive = app.add_subcommand("derive", "Derive the biotic parameters of a taxon with their audit trail");
    derive->add_option("taxon", taxon, "Taxon id")->required();

    std::string interaction;
    std::string sign_text;
    auto* map = app.add_subcommand("map-interaction", "Map an interaction name to a relationship kind");
    map->add_option("name", interaction, "Interaction name, e.g. \"preys on\"")->required();
    map->add_option("--sign", sign_text, "+ or -");

    int port = service::port_from_env();
    std::string host = "0.0.0.0";
    std::string data_dir;
    std::string static_dir;
    double fps = 20;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--port", port, "Port (ECOFORGE_PORT, default 8080)")->check(CLI::Range(1, 65535));
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--data-dir", data_dir, "Model persistence directory")->envname("ECOFORGE_DATA_DIR");
    serve->add_option("--static-dir", static_dir, "Serve a built web UI from this directory");
    serve->add_option("--fps", fps, "Streamed frames per second")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*validate) {
            auto model = load_model(model_path);
            auto report = validate_model(model);
            Json body = report_to_json(report);
            body["ok"] = report.ok();
            out << canonical_dump(body);
            if (!report.ok()) {
                for (const auto& e : report.errors)
                    diag.report(e.code, e.message, e.subject);
                return kValidation;
            }
            return kOk;
        }
        if (*format) {
            write_output(output, serialize_model(load_model(model_path)), out);
            return kOk;
        }
        if (*compile) {
            auto prog = compiler::compile(load_model(model_path));
            std::string text;
            if (target == "netlogo")
                text = compiler::emit_netlogo(prog);
            else if (target == "engine")
                text = canonical_dump(compiler::engine_program_to_json(compiler::compile_for_engine(prog)));
            else
                text = canonical_dump(ir::program_to_json(prog));
            write_output(output, text, out);
            return kOk;
        }
        if (*simulate) {
            auto program = compiler::compile_for_engine(compiler::compile(load_model(model_path)));
            engine::SimConfig cfg;
            cfg.seed = seed;
            cfg.max_ticks = months;
            cfg.snapshot_every = snapshot_every;
            auto series = engine::run(program, cfg);
            if (!json_path.empty())
                write_output(json_path, canonical_dump(engine::series_to_json(series)), out);
            if (!csv_path.empty() || json_path.empty())
                write_output(csv_path, engine::to_csv(series), out);
            return kOk;
        }
        if (*lookup) {
            auto backend = backend_for(backend_spec);
            Json list = Json::array();
            for (const auto& m : backend->search_taxa(query))
                list.push_back(traits::taxon_to_json(m));
            out << canonical_dump(list);
            return kOk;
        }
        if (*derive) {
            auto backend = backend_for(backend_spec);
            out << canonical_dump(traits::species_parameters_to_json(traits::derive_for_taxon(*backend, taxon)));
            return kOk;
        }
        if (*map) {
            std::optional<ontology::Sign> sign;
            if (!sign_text.empty()) {
                sign = ontology::sign_from(sign_text);
                if (!sign) {
                    diag.report("Usage", "--sign must be + or -", sign_text);
                    return kUsage;
                }
            }
            out << canonical_dump(ontology::mapping_to_json(ontology::map_interaction(interaction, sign)));
            return kOk;
        }
        if (*serve) {
            service::ServiceOptions opts;
            opts.data_dir = data_dir;
            opts.trait_backend = backend_spec;
            opts.static_dir = static_dir;
            opts.frames_per_second = fps;
            service::Service svc(opts);
            err << "listening on " << host << ":" << port << "\n";
            if (!svc.listen(host, port)) {
                diag.report("Io", "cannot listen on " + host + ":" + std::to_string(port), host);
                return kRuntime;
            }
            return kOk;
        }
    } catch (const Error& e) {
        diag.report(to_string(e.code()), e.what(), e.subject());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        diag.report("Internal", e.what(), "");
        return kRuntime;
    }
    return kUsage;
}

} // namespace ecoforge::cli
