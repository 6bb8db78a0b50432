#include "ecoforge/cli.hpp"
#include "ecoforge/error.hpp"
#include "ecoforge/json_canon.hpp"
#include "ecoforge/service.hpp"
#include "ecoforge/traits.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <sstream>
#include <thread>

#include <unistd.h>

using namespace ecoforge;

namespace {

class Server {
public:
    explicit Server(service::ServiceOptions options = fast())
        : svc_(std::move(options)), port_(svc_.bind_to_any_port("127.0.0.1")),
          thread_([this] { svc_.listen_after_bind(); })
    {
        svc_.wait_until_ready();
    }
    ~Server()
    {
        svc_.stop();
        thread_.join();
    }

    httplib::Client client() const
    {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(30);
        return c;
    }

    static service::ServiceOptions fast()
    {
        service::ServiceOptions o;
        o.frames_per_second = 10000;
        o.trait_backend = "fixtures:" + test::source_path("data/taxa");
        return o;
    }

private:
    service::Service svc_;
    int port_;
    std::thread thread_;
};

Json body_of(const httplib::Result& res)
{
    EXPECT_TRUE(res);
    return Json::parse(res->body);
}

std::string cli_csv(const std::string& model, int months, int seed)
{
    std::ostringstream out, err;
    std::string m = std::to_string(months), s = std::to_string(seed);
    const char* argv[] = {"ecoforge", "simulate", model.c_str(), "--months", m.c_str(), "--seed", s.c_str()};
    EXPECT_EQ(cli::run(7, argv, out, err), cli::kOk) << err.str();
    return out.str();
}

// Rebuilds CSV rows from streamed frames, columns in header order.
std::string csv_from_stream(const std::string& header, const std::string& ndjson)
{
    const std::string first = header.substr(0, header.find('\n'));
    std::vector<std::string> columns;
    std::stringstream hs(first);
    for (std::string c; std::getline(hs, c, ',');)
        columns.push_back(c);
    std::string out = first + "\n";
    std::stringstream lines(ndjson);
    for (std::string line; std::getline(lines, line);) {
        if (line.empty())
            continue;
        Json f = Json::parse(line);
        std::string row = std::to_string(f.at("tick").get<std::int64_t>());
        for (std::size_t i = 1; i < columns.size(); ++i) {
            const auto& c = columns[i];
            auto cut = c.rfind('_');
            std::string label = c.substr(0, cut), field = c.substr(cut + 1);
            if (field == "count")
                row += "," + std::to_string(f.at("counts").at(label).get<std::uint64_t>());
            else if (field == "carbon")
                row += "," + format_number(f.at("carbon").at(label).get<double>());
            else
                row += "," + format_number(f.at("pools").at(label).get<double>());
        }
        out += row + "\n";
    }
    return out;
}

} // namespace

TEST(Service, HealthAndCors)
{
    Server server;
    auto c = server.client();
    auto res = c.Get("/api/v1/health");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
    auto opt = c.Options("/api/v1/models");
    ASSERT_TRUE(opt);
    EXPECT_EQ(opt->status, 204);
}

TEST(Service, ModelCrud)
{
    Server server;
    auto c = server.client();
    const std::string text = test::read_file(test::model_path("kudzu"));
    auto created = c.Post("/api/v1/models", text, "application/json");
    ASSERT_TRUE(created);
    ASSERT_EQ(created->status, 201);
    std::string id = Json::parse(created->body).at("id");
    EXPECT_EQ(created->get_header_value("Location"), "/api/v1/models/" + id);

    auto got = c.Get("/api/v1/models/" + id);
    ASSERT_TRUE(got);
    EXPECT_EQ(got->body, text); // bundled models are stored in canonical form

    auto list = body_of(c.Get("/api/v1/models"));
    ASSERT_EQ(list.size(), 1u);
    EXPECT_EQ(list[0].at("id"), id);

    auto put = c.Put("/api/v1/models/" + id, test::read_file(test::model_path("grazing")), "application/json");
    ASSERT_TRUE(put);
    EXPECT_EQ(put->status, 200);

    auto nl = c.Get("/api/v1/models/" + id + "/netlogo");
    ASSERT_TRUE(nl);
    EXPECT_NE(nl->body.find("breed [sheep"), std::string::npos);

    EXPECT_EQ(c.Delete("/api/v1/models/" + id)->status, 204);
    auto gone = c.Get("/api/v1/models/" + id);
    EXPECT_EQ(gone->status, 404);
    EXPECT_EQ(Json::parse(gone->body).at("error").at("code"), "NotFound");
}

TEST(Service, InvalidModelsAreRejectedWithFindings)
{
    Server server;
    auto c = server.client();
    auto model = Json::parse(test::read_file(test::model_path("kudzu")));
    model["components"][1]["properties"]["lifespan"] = -5;
    auto res = c.Post("/api/v1/models", model.dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 422);
    auto err = Json::parse(res->body).at("error");
    EXPECT_EQ(err.at("code"), "Validation");

    auto syntax = c.Post("/api/v1/models", "{not json", "application/json");
    EXPECT_EQ(syntax->status, 400);
}

TEST(Service, SpeciesAndInteractions)
{
    Server server;
    auto c = server.client();
    auto found = body_of(c.Get("/api/v1/species?q=muskrat"));
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].at("taxon_id"), "1037903");

    auto params = body_of(c.Get("/api/v1/species/1037903/parameters"));
    EXPECT_EQ(params.at("properties").at("lifespan"), 36);

    EXPECT_EQ(c.Get("/api/v1/species?q=")->status, 400);
    EXPECT_EQ(c.Get("/api/v1/species/nope/parameters")->status, 404);

    auto aliases = body_of(c.Get("/api/v1/interactions"));
    EXPECT_EQ(aliases.size(), 23u);
    auto mapped = body_of(c.Get("/api/v1/interactions/map?name=preys%20on"));
    EXPECT_EQ(mapped.at("kind"), "Consumes");
    EXPECT_EQ(c.Get("/api/v1/interactions/map?name=photobombs")->status, 404);
}

TEST(Service, SimulationFlowMatchesCliCsv)
{
    Server server;
    auto c = server.client();
    const int months = 36, seed = 42;
    auto created = c.Post("/api/v1/models", test::read_file(test::model_path("predator_prey")), "application/json");
    std::string model_id = Json::parse(created->body).at("id");

    auto valid = body_of(c.Post("/api/v1/models/" + model_id + "/validate", "", "application/json"));
    EXPECT_TRUE(valid.at("ok").get<bool>());

    Json req = {{"model_id", model_id}, {"seed", seed}, {"max_ticks", months}};
    auto sim = c.Post("/api/v1/simulations", req.dump(), "application/json");
    ASSERT_EQ(sim->status, 201);
    std::string sid = Json::parse(sim->body).at("id");
    EXPECT_EQ(Json::parse(sim->body).at("status"), "Ready");

    auto started = body_of(c.Post("/api/v1/simulations/" + sid + "/command", R"({"command":"start"})", "application/json"));
    EXPECT_NE(started.at("status"), "Ready");

    std::string streamed;
    auto stream = c.Get("/api/v1/simulations/" + sid + "/frames", [&](const char* data, std::size_t n) {
        streamed.append(data, n);
        return true;
    });
    ASSERT_TRUE(stream);
    EXPECT_EQ(stream->status, 200);

    auto csv = c.Get("/api/v1/simulations/" + sid + "/series.csv");
    ASSERT_EQ(csv->status, 200);
    const std::string expected = cli_csv(test::model_path("predator_prey"), months, seed);
    EXPECT_EQ(csv->body, expected);
    EXPECT_EQ(csv_from_stream(csv->body, streamed), expected);

    auto history = body_of(c.Get("/api/v1/simulations/" + sid + "/history?from=30"));
    ASSERT_FALSE(history.empty());
    EXPECT_EQ(history.front().at("tick"), 30);
    EXPECT_EQ(c.Get("/api/v1/simulations/" + sid + "/history?from=3x")->status, 400);

    EXPECT_EQ(c.Post("/api/v1/simulations/" + sid + "/command", R"({"command":"start"})", "application/json")->status,
              409);
    auto reset = body_of(c.Post("/api/v1/simulations/" + sid + "/command", R"("reset")", "application/json"));
    EXPECT_EQ(reset.at("status"), "Ready");
    EXPECT_EQ(reset.at("tick"), 0);
    EXPECT_EQ(c.Delete("/api/v1/simulations/" + sid)->status, 204);
}

TEST(Service, StepCommandAdvancesOneTick)
{
    Server server;
    auto c = server.client();
    auto created = c.Post("/api/v1/models", test::read_file(test::model_path("grazing")), "application/json");
    std::string model_id = Json::parse(created->body).at("id");
    Json req = {{"model_id", model_id}, {"seed", 1}, {"max_ticks", 10}};
    std::string sid = Json::parse(c.Post("/api/v1/simulations", req.dump(), "application/json")->body).at("id");
    auto after = body_of(c.Post("/api/v1/simulations/" + sid + "/command", R"({"command":"step"})", "application/json"));
    EXPECT_EQ(after.at("tick"), 1);
    EXPECT_EQ(c.Get("/api/v1/simulations/" + sid + "/series.csv")->status, 409);
    EXPECT_EQ(c.Post("/api/v1/simulations/" + sid + "/command", R"({"command":"warp"})", "application/json")->status,
              400);
}

TEST(Service, PersistsModelsInDataDir)
{
    auto dir = std::filesystem::temp_directory_path() / ("ecoforge-store-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::string id;
    {
        auto o = Server::fast();
        o.data_dir = dir.string();
        Server server(o);
        auto c = server.client();
        id = Json::parse(c.Post("/api/v1/models", test::read_file(test::model_path("grazing")), "application/json")->body)
                 .at("id");
    }
    {
        auto o = Server::fast();
        o.data_dir = dir.string();
        Server server(o);
        auto res = server.client().Get("/api/v1/models/" + id);
        ASSERT_TRUE(res);
        EXPECT_EQ(res->status, 200);
        EXPECT_EQ(res->body, test::read_file(test::model_path("grazing")));
    }
    std::filesystem::remove_all(dir);
}

// The live trait client against a stand-in for the EOL search and Cypher endpoints.
TEST(LiveBackend, TalksToSearchAndCypherEndpoints)
{
    httplib::Server fake;
    fake.Get("/eol/api/search/1.0.json", [](const httplib::Request& req, httplib::Response& res) {
        Json body = {{"results", Json::array({{{"id", 328598}, {"title", "Ondatra zibethicus"}}})}};
        if (req.get_param_value("q") != "muskrat")
            body["results"] = Json::array();
        res.set_content(body.dump(), "application/json");
    });
    fake.Get("/eol/service/cypher", [](const httplib::Request& req, httplib::Response& res) {
        std::string q = req.get_param_value("query");
        Json body;
        if (q.find(":parent*") != std::string::npos)
            body = {{"columns", {"a.canonical", "a.rank"}},
                    {"data", Json::array({Json::array({"Ondatra", "genus"}), Json::array({"Rodentia", "order"}),
                                         Json::array({"Mammalia", "class"})})}};
        else if (q.find(":trait") != std::string::npos)
            body = {{"columns", {"pred.name", "t.measurement", "u.name", "t.source"}},
                    {"data", {{"life span", "3", "years", "B"}, {"body mass", 1.2, "kg", "A"}, {"life span", 4, "years", "A"}}}};
        else
            body = {{"columns", {"p.canonical"}}, {"data", {{"Ondatra zibethicus"}}}};
        res.set_content(body.dump(), "application/json");
    });
    int port = fake.bind_to_any_port("127.0.0.1");
    std::thread t([&] { fake.listen_after_bind(); });
    fake.wait_until_ready();

    traits::LiveBackend live("http://127.0.0.1:" + std::to_string(port) + "/eol/");
    auto hits = live.search_taxa("muskrat");
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].taxon_id, "328598");
    auto taxon = live.taxon("328598");
    EXPECT_EQ(taxon.ancestry, (std::vector<std::string>{"Mammalia", "Rodentia", "Ondatra"}));
    auto records = live.fetch_traits("328598");
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[0].predicate, "body mass");
    EXPECT_EQ(records[1].source, "A");
    EXPECT_EQ(records[2].value, 3);

    auto species = traits::derive_for_taxon(live, "328598");
    EXPECT_EQ(species.properties.lifespan, 42);
    EXPECT_DOUBLE_EQ(species.properties.carbon_biomass, 0.16 * 1.2);

    EXPECT_THROW(live.taxon("1 OR 1=1"), Error);
    fake.stop();
    t.join();

    try {
        live.search_taxa("muskrat");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
    }
}
