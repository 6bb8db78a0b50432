#include "ecoforge/service.hpp"
#include "ecoforge/compiler.hpp"
#include "ecoforge/engine.hpp"
#include "ecoforge/error.hpp"
#include "ecoforge/ontology.hpp"

#include <httplib.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace ecoforge::service {

namespace fs = std::filesystem;

int port_from_env()
{
    if (const char* env = std::getenv("ECOFORGE_PORT"); env && *env) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0 && v < 65536)
            return static_cast<int>(v);
    }
    return 8080;
}

namespace {

int status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Syntax:
    case ErrorCode::Schema:
    case ErrorCode::MissingSign:
    case ErrorCode::EmptyQuery: return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownTaxon:
    case ErrorCode::UnknownInteraction: return 404;
    case ErrorCode::IllegalTransition: return 409;
    case ErrorCode::Validation:
    case ErrorCode::EndpointKindMismatch:
    case ErrorCode::UnsupportedUnit:
    case ErrorCode::UnresolvedProperties:
    case ErrorCode::UnsupportedConstruct:
    case ErrorCode::CapacityExceeded: return 422;
    case ErrorCode::BackendUnavailable: return 503;
    case ErrorCode::InvariantBreach:
    case ErrorCode::Io: return 500;
    }
    return 500;
}

void send_json(httplib::Response& res, int status, const Json& body)
{
    res.status = status;
    res.set_content(compact_dump(body) + "\n", "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message, const std::string& subject,
                Json extra = nullptr)
{
    Json err = {{"status", status_for(code)},
                {"code", std::string(to_string(code))},
                {"message", message},
                {"subject", subject}};
    Json body = {{"error", std::move(err)}};
    if (!extra.is_null())
        body["report"] = std::move(extra);
    send_json(res, status_for(code), body);
}

Json parse_body(const httplib::Request& req)
{
    try {
        return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Syntax, std::string("request body is not JSON: ") + e.what(),
                    std::to_string(e.byte));
    }
}

// ---------------------------------------------------------------------------
// models

class ModelStore {
public:
    explicit ModelStore(std::string dir) : dir_(std::move(dir))
    {
        if (dir_.empty())
            return;
        fs::create_directories(fs::path(dir_) / "models");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(fs::path(dir_) / "models"))
            if (e.path().extension() == ".json")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f, std::ios::binary);
            std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            try {
                models_[f.stem().string()] = parse_model(text, {.check_references = false});
            } catch (const Error&) {
                continue; // unreadable files stay on disk untouched
            }
            bump_counter(f.stem().string());
        }
    }

    std::string create(ConceptualModel model)
    {
        std::lock_guard lock(mutex_);
        std::string id;
        do {
            id = "m" + std::to_string(++counter_);
        } while (models_.count(id));
        persist(id, model);
        models_[id] = std::move(model);
        return id;
    }

    std::optional<ConceptualModel> get(const std::string& id) const
    {
        std::lock_guard lock(mutex_);
        auto it = models_.find(id);
        if (it == models_.end())
            return std::nullopt;
        return it->second;
    }

    ConceptualModel require(const std::string& id) const
    {
        auto m = get(id);
        if (!m)
            throw Error(ErrorCode::NotFound, "no model '" + id + "'", id);
        return *m;
    }

    bool put(const std::string& id, ConceptualModel model)
    {
        std::lock_guard lock(mutex_);
        if (!models_.count(id))
            return false;
        persist(id, model);
        models_[id] = std::move(model);
        return true;
    }

    bool erase(const std::string& id)
    {
        std::lock_guard lock(mutex_);
        if (!models_.erase(id))
            return false;
        if (!dir_.empty())
            fs::remove(path_for(id));
        return true;
    }

    std::vector<std::pair<std::string, std::string>> list() const
    {
        std::lock_guard lock(mutex_);
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [id, m] : models_)
            out.emplace_back(id, m.name);
        return out;
    }

private:
    std::string dir_;
    mutable std::mutex mutex_;
    std::map<std::string, ConceptualModel> models_;
    std::uint64_t counter_ = 0;

    fs::path path_for(const std::string& id) const { return fs::path(dir_) / "models" / (id + ".json"); }

    void bump_counter(const std::string& id)
    {
        if (id.size() > 1 && id[0] == 'm') {
            char* end = nullptr;
            auto v = std::strtoull(id.c_str() + 1, &end, 10);
            if (end && *end == '\0')
                counter_ = std::max<std::uint64_t>(counter_, v);
        }
    }

    void persist(const std::string& id, const ConceptualModel& model) const
    {
        if (dir_.empty())
            return;
        auto path = path_for(id);
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << serialize_model(model);
            if (!out)
                throw Error(ErrorCode::Io, "cannot write " + tmp.string(), id);
        }
        fs::rename(tmp, path);
    }
};

// ---------------------------------------------------------------------------
// simulation sessions

class Session {
public:
    Session(std::string id, std::string model_id, compiler::EngineProgram program, engine::SimConfig cfg,
            std::size_t buffer)
        : id_(std::move(id)), model_id_(std::move(model_id)), program_(std::move(program)), buffer_(buffer)
    {
        state_ = engine::init_run(program_, cfg);
        history_.push_back(engine::snapshot(state_));
        worker_ = std::thread([this] { loop(); });
    }

    ~Session() { shutdown(); }

    void shutdown()
    {
        {
            std::lock_guard lock(mutex_);
            if (closing_)
                return;
            closing_ = true;
        }
        cv_.notify_all();
        if (worker_.joinable())
            worker_.join();
    }

    const std::string& id() const { return id_; }
    const compiler::EngineProgram& program() const { return program_; }

    void command(const std::string& name)
    {
        std::unique_lock lock(mutex_);
        if (name == "step") {
            engine::SimFrame f = engine::step(program_, state_);
            record(std::move(f));
        } else {
            auto cmd = engine::command_from(name);
            if (!cmd)
                throw Error(ErrorCode::Schema, "unknown command '" + name + "'", "command");
            engine::control(program_, state_, *cmd);
            if (*cmd == engine::Command::Reset) {
                history_.assign(1, engine::snapshot(state_));
                ++generation_;
            }
        }
        lock.unlock();
        cv_.notify_all();
    }

    Json describe() const
    {
        std::lock_guard lock(mutex_);
        const auto& c = state_.config;
        return {{"id", id_},
                {"model_id", model_id_},
                {"status", std::string(engine::to_string(state_.status))},
                {"tick", state_.tick},
                {"frames", history_.size()},
                {"config",
                 {{"seed", c.seed},
                  {"max_ticks", c.max_ticks},
                  {"snapshot_every", c.snapshot_every},
                  {"grid_width", c.grid_width},
                  {"grid_height", c.grid_height}}}};
    }

    Json history_json(std::int64_t from) const
    {
        std::lock_guard lock(mutex_);
        Json frames = Json::array();
        for (const auto& f : history_)
            if (f.tick >= from)
                frames.push_back(engine::frame_to_json(program_, f));
        return frames;
    }

    // Empty when the run has not finished.
    std::optional<std::string> csv() const
    {
        std::lock_guard lock(mutex_);
        if (state_.status != engine::Status::Finished)
            return std::nullopt;
        std::string out = engine::csv_header(program_);
        for (const auto& f : history_)
            out += engine::csv_row(f);
        return out;
    }

    // Streaming cursor. A subscriber sees frames with tick >= from, in order,
    // until the run finishes, the session is reset, or the service shuts down.
    struct Cursor {
        std::size_t index = 0;
        std::uint64_t generation = 0;
        std::uint64_t token = 0;
    };

    Cursor subscribe(std::int64_t from)
    {
        std::lock_guard lock(mutex_);
        Cursor c;
        c.generation = generation_;
        while (c.index < history_.size() && history_[c.index].tick < from)
            ++c.index;
        c.token = ++next_token_;
        cursors_[c.token] = c.index;
        return c;
    }

    void unsubscribe(const Cursor& c)
    {
        {
            std::lock_guard lock(mutex_);
            cursors_.erase(c.token);
        }
        cv_.notify_all();
    }

    // Waits for the next frame; nullopt ends the stream.
    std::optional<Json> next(Cursor& c, const std::function<bool()>& alive)
    {
        std::unique_lock lock(mutex_);
        while (true) {
            if (closing_ || c.generation != generation_ || !alive())
                return std::nullopt;
            if (c.index < history_.size()) {
                Json frame = engine::frame_to_json(program_, history_[c.index]);
                cursors_[c.token] = ++c.index;
                lock.unlock();
                cv_.notify_all();
                return frame;
            }
            if (state_.status == engine::Status::Finished)
                return std::nullopt;
            cv_.wait_for(lock, std::chrono::milliseconds(200));
        }
    }

private:
    std::string id_;
    std::string model_id_;
    compiler::EngineProgram program_;
    std::size_t buffer_;

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    engine::SimState state_;
    std::vector<engine::SimFrame> history_;
    std::uint64_t generation_ = 0;
    std::map<std::uint64_t, std::size_t> cursors_;
    std::uint64_t next_token_ = 0;
    bool closing_ = false;
    std::thread worker_;

    void record(engine::SimFrame f)
    {
        if (f.tick % state_.config.snapshot_every == 0)
            history_.push_back(std::move(f));
    }

    bool may_step() const
    {
        if (state_.status != engine::Status::Running)
            return false;
        if (cursors_.empty())
            return true;
        std::size_t slowest = history_.size();
        for (const auto& [token, index] : cursors_)
            slowest = std::min(slowest, index);
        return history_.size() - slowest < buffer_;
    }

    void loop()
    {
        std::unique_lock lock(mutex_);
        while (!closing_) {
            if (!may_step()) {
                cv_.wait(lock);
                continue;
            }
            try {
                record(engine::step(program_, state_));
            } catch (const Error&) {
                // an engine failure finishes the session; clients see the last good frame
                state_.status = engine::Status::Finished;
            }
            cv_.notify_all();
        }
    }
};

class SessionRegistry {
public:
    std::shared_ptr<Session> create(std::string model_id, compiler::EngineProgram program, engine::SimConfig cfg,
                                    std::size_t buffer)
    {
        std::lock_guard lock(mutex_);
        std::string id = "s" + std::to_string(++counter_);
        auto s = std::make_shared<Session>(id, std::move(model_id), std::move(program), cfg, buffer);
        sessions_[id] = s;
        return s;
    }

    std::shared_ptr<Session> require(const std::string& id) const
    {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end())
            throw Error(ErrorCode::NotFound, "no simulation session '" + id + "'", id);
        return it->second;
    }

    bool erase(const std::string& id)
    {
        std::shared_ptr<Session> s;
        {
            std::lock_guard lock(mutex_);
            auto it = sessions_.find(id);
            if (it == sessions_.end())
                return false;
            s = it->second;
            sessions_.erase(it);
        }
        s->shutdown();
        return true;
    }

    void shutdown_all()
    {
        std::map<std::string, std::shared_ptr<Session>> all;
        {
            std::lock_guard lock(mutex_);
            all.swap(sessions_);
        }
        for (auto& [id, s] : all)
            s->shutdown();
    }

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t counter_ = 0;
};

template <class T>
T field_or(const Json& body, const char* name, T fallback)
{
    if (!body.contains(name))
        return fallback;
    try {
        return body.at(name).get<T>();
    } catch (const Json::exception&) {
        throw Error(ErrorCode::Schema, std::string("field '") + name + "' has the wrong type", name);
    }
}

} // namespace

struct Service::Impl {
    ServiceOptions options;
    httplib::Server server;
    ModelStore models;
    SessionRegistry sessions;
    std::unique_ptr<traits::TraitBackend> backend;
    std::mutex backend_mutex;
    std::atomic<bool> stopping{false};

    explicit Impl(ServiceOptions opts)
        : options(std::move(opts)), models(options.data_dir.empty() ? std::string() : options.data_dir)
    {
        routes();
    }

    traits::TraitBackend& traits_backend()
    {
        std::lock_guard lock(backend_mutex);
        if (!backend)
            backend = options.trait_backend.empty() ? traits::backend_from_env()
                                                    : traits::make_backend(options.trait_backend);
        return *backend;
    }

    // Runs a handler, turning module errors into the JSON error envelope.
    template <class F>
    httplib::Server::Handler guarded(F f)
    {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const Error& e) {
                send_error(res, e.code(), e.what(), e.subject());
            } catch (const std::exception& e) {
                send_error(res, ErrorCode::InvariantBreach, e.what(), "");
            }
        };
    }

    void store_checked(const httplib::Request& req, httplib::Response& res, const std::string* id)
    {
        auto model = parse_model(req.body, {.check_references = false});
        auto report = validate_model(model);
        if (!report.ok()) {
            send_error(res, ErrorCode::Validation,
                       "model has " + std::to_string(report.errors.size()) + " validation error(s)",
                       report.errors.front().subject, report_to_json(report));
            return;
        }
        if (id) {
            if (!models.put(*id, std::move(model)))
                throw Error(ErrorCode::NotFound, "no model '" + *id + "'", *id);
            send_json(res, 200, {{"id", *id}, {"report", report_to_json(report)}});
        } else {
            auto new_id = models.create(std::move(model));
            res.set_header("Location", "/api/v1/models/" + new_id);
            send_json(res, 201, {{"id", new_id}, {"report", report_to_json(report)}});
        }
    }

    void routes()
    {
        const std::string api = "/api/v1";
        auto& s = server;

        s.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", options.cors_origin);
            res.set_header("Access-Control-Expose-Headers", "Location");
        });
        s.Options(R"(/api/v1/.*)", [this](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.set_header("Access-Control-Max-Age", "600");
            res.status = 204;
        });
        s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
            if (res.body.empty() && res.status == 404)
                send_error(res, ErrorCode::NotFound, "no route for " + req.method + " " + req.path, req.path);
        });
        if (!options.static_dir.empty())
            s.set_mount_point("/", options.static_dir);

        s.Get(api + "/health", guarded([](const auto&, auto& res) { send_json(res, 200, {{"status", "ok"}}); }));

        // models
        s.Get(api + "/models", guarded([this](const auto&, auto& res) {
                  Json list = Json::array();
                  for (const auto& [id, name] : models.list())
                      list.push_back({{"id", id}, {"name", name}});
                  send_json(res, 200, list);
              }));
        s.Post(api + "/models", guarded([this](const auto& req, auto& res) { store_checked(req, res, nullptr); }));
        s.Get(api + R"(/models/([^/]+))", guarded([this](const auto& req, auto& res) {
                  auto m = models.require(req.matches[1]);
                  res.set_content(serialize_model(m), "application/json");
              }));
        s.Put(api + R"(/models/([^/]+))", guarded([this](const auto& req, auto& res) {
                  std::string id = req.matches[1];
                  models.require(id);
                  store_checked(req, res, &id);
              }));
        s.Delete(api + R"(/models/([^/]+))", guarded([this](const auto& req, auto& res) {
                     std::string id = req.matches[1];
                     if (!models.erase(id))
                         throw Error(ErrorCode::NotFound, "no model '" + id + "'", id);
                     res.status = 204;
                 }));
        s.Post(api + R"(/models/([^/]+)/validate)", guarded([this](const auto& req, auto& res) {
                   auto report = validate_model(models.require(req.matches[1]));
                   Json body = report_to_json(report);
                   body["ok"] = report.ok();
                   send_json(res, 200, body);
               }));
        s.Get(api + R"(/models/([^/]+)/netlogo)", guarded([this](const auto& req, auto& res) {
                  auto prog = compiler::compile(models.require(req.matches[1]));
                  res.set_content(compiler::emit_netlogo(prog), "text/plain; charset=utf-8");
              }));
        s.Get(api + R"(/models/([^/]+)/engine)", guarded([this](const auto& req, auto& res) {
                  auto prog = compiler::compile(models.require(req.matches[1]));
                  res.set_content(canonical_dump(compiler::engine_program_to_json(compiler::compile_for_engine(prog))),
                                  "application/json");
              }));
        s.Get(api + R"(/models/([^/]+)/ir)", guarded([this](const auto& req, auto& res) {
                  auto prog = compiler::compile(models.require(req.matches[1]));
                  res.set_content(canonical_dump(ir::program_to_json(prog)), "application/json");
              }));

        // species
        s.Get(api + "/species", guarded([this](const auto& req, auto& res) {
                  auto matches = traits_backend().search_taxa(req.get_param_value("q"));
                  Json list = Json::array();
                  for (const auto& m : matches)
                      list.push_back(traits::taxon_to_json(m));
                  send_json(res, 200, list);
              }));
        s.Get(api + R"(/species/([^/]+)/parameters)", guarded([this](const auto& req, auto& res) {
                  auto sp = traits::derive_for_taxon(traits_backend(), req.matches[1]);
                  send_json(res, 200, traits::species_parameters_to_json(sp));
              }));

        // interactions
        s.Get(api + "/interactions", guarded([](const auto&, auto& res) {
                  Json list = Json::array();
                  for (const auto& a : ontology::list_aliases())
                      list.push_back(ontology::alias_to_json(a));
                  send_json(res, 200, list);
              }));
        s.Get(api + "/interactions/map", guarded([](const auto& req, auto& res) {
                  std::optional<ontology::Sign> sign;
                  if (req.has_param("sign")) {
                      sign = ontology::sign_from(req.get_param_value("sign"));
                      if (!sign)
                          throw Error(ErrorCode::Schema, "sign must be + or -", "sign");
                  }
                  send_json(res, 200, ontology::mapping_to_json(ontology::map_interaction(req.get_param_value("name"), sign)));
              }));

        // simulations
        s.Post(api + "/simulations", guarded([this](const auto& req, auto& res) {
                   Json body = parse_body(req);
                   if (!body.is_object() || !body.contains("model_id") || !body["model_id"].is_string())
                       throw Error(ErrorCode::Schema, "model_id is required", "model_id");
                   std::string model_id = body["model_id"];
                   auto model = models.require(model_id);
                   engine::SimConfig cfg;
                   cfg.seed = field_or<std::uint64_t>(body, "seed", 0);
                   cfg.max_ticks = field_or<std::int64_t>(body, "max_ticks", cfg.max_ticks);
                   cfg.snapshot_every = field_or<std::int64_t>(body, "snapshot_every", 1);
                   cfg.grid_width = field_or<int>(body, "grid_width", cfg.grid_width);
                   cfg.grid_height = field_or<int>(body, "grid_height", cfg.grid_height);
                   engine::check_config(cfg);
                   auto program = compiler::compile_for_engine(compiler::compile(model));
                   auto session = sessions.create(model_id, std::move(program), cfg, options.buffer_frames);
                   res.set_header("Location", "/api/v1/simulations/" + session->id());
                   send_json(res, 201, session->describe());
               }));
        s.Get(api + R"(/simulations/([^/]+))", guarded([this](const auto& req, auto& res) {
                  send_json(res, 200, sessions.require(req.matches[1])->describe());
              }));
        s.Delete(api + R"(/simulations/([^/]+))", guarded([this](const auto& req, auto& res) {
                     std::string id = req.matches[1];
                     if (!sessions.erase(id))
                         throw Error(ErrorCode::NotFound, "no simulation session '" + id + "'", id);
                     res.status = 204;
                 }));
        s.Post(api + R"(/simulations/([^/]+)/command)", guarded([this](const auto& req, auto& res) {
                   auto session = sessions.require(req.matches[1]);
                   Json body = parse_body(req);
                   std::string cmd;
                   if (body.is_string())
                       cmd = body.get<std::string>();
                   else if (body.is_object() && body.contains("command") && body["command"].is_string())
                       cmd = body["command"];
                   else
                       throw Error(ErrorCode::Schema, "command is required", "command");
                   session->command(cmd);
                   send_json(res, 200, session->describe());
               }));
        s.Get(api + R"(/simulations/([^/]+)/history)", guarded([this](const auto& req, auto& res) {
                  auto session = sessions.require(req.matches[1]);
                  std::int64_t from = 0;
                  if (req.has_param("from")) {
                      const auto text = req.get_param_value("from");
                      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), from);
                      if (ec != std::errc() || end != text.data() + text.size())
                          throw Error(ErrorCode::Schema, "from must be an integer tick", "from");
                  }
                  send_json(res, 200, session->history_json(from));
              }));
        s.Get(api + R"(/simulations/([^/]+)/series\.csv)", guarded([this](const auto& req, auto& res) {
                  auto session = sessions.require(req.matches[1]);
                  auto csv = session->csv();
                  if (!csv)
                      throw Error(ErrorCode::IllegalTransition, "series is available once the run has finished",
                                  session->id());
                  res.set_content(*csv, "text/csv");
              }));
        s.Get(api + R"(/simulations/([^/]+)/frames)", guarded([this](const auto& req, auto& res) {
                  auto session = sessions.require(req.matches[1]);
                  std::int64_t from = 0;
                  if (req.has_param("from")) {
                      const auto text = req.get_param_value("from");
                      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), from);
                      if (ec != std::errc() || end != text.data() + text.size())
                          throw Error(ErrorCode::Schema, "from must be an integer tick", "from");
                  }
                  auto cursor = std::make_shared<Session::Cursor>(session->subscribe(from));
                  const auto interval = std::chrono::duration<double>(
                      options.frames_per_second > 0 ? 1.0 / options.frames_per_second : 0.0);
                  auto last = std::make_shared<std::chrono::steady_clock::time_point>();
                  res.set_header("Cache-Control", "no-cache");
                  res.set_chunked_content_provider(
                      "application/x-ndjson",
                      [this, session, cursor, interval, last](std::size_t, httplib::DataSink& sink) {
                          auto frame = session->next(*cursor, [&] { return !stopping && sink.is_writable(); });
                          if (!frame) {
                              sink.done();
                              return true;
                          }
                          auto due = *last + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
                          std::this_thread::sleep_until(due);
                          *last = std::chrono::steady_clock::now();
                          std::string line = compact_dump(*frame) + "\n";
                          return sink.write(line.data(), line.size());
                      },
                      [session, cursor](bool) { session->unsubscribe(*cursor); });
              }));
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service()
{
    stop();
}

bool Service::listen(const std::string& host, int port)
{
    return impl_->server.listen(host, port);
}

int Service::bind_to_any_port(const std::string& host)
{
    return impl_->server.bind_to_any_port(host);
}

bool Service::listen_after_bind()
{
    return impl_->server.listen_after_bind();
}

void Service::wait_until_ready() const
{
    impl_->server.wait_until_ready();
}

void Service::stop()
{
    impl_->stopping = true;
    impl_->sessions.shutdown_all();
    if (impl_->server.is_running())
        impl_->server.stop();
}

} // namespace ecoforge::service
