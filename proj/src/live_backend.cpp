#include "ecoforge/error.hpp"
#include "ecoforge/traits.hpp"

#include <httplib.h>

#include <future>
#include <map>
#include <mutex>

namespace ecoforge::traits {

// Search goes through GET <base>/api/search/1.0.json?q=...; page metadata and
// trait rows come from GET <base>/service/cypher?query=... returning
// {"columns": [...], "data": [[...], ...]}.
struct LiveBackend::Impl {
    std::string base;
    std::string prefix;

    std::mutex mutex;
    std::map<std::string, std::shared_future<std::vector<TraitRecord>>> inflight;

    explicit Impl(std::string url)
    {
        // split "http://host:port/path" into origin and path prefix
        auto scheme = url.find("://");
        auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (slash == std::string::npos) {
            base = url;
        } else {
            base = url.substr(0, slash);
            prefix = url.substr(slash);
            while (!prefix.empty() && prefix.back() == '/')
                prefix.pop_back();
        }
    }

    Json get(const std::string& path, const httplib::Params& params)
    {
        httplib::Client client(base);
        client.set_connection_timeout(5);
        client.set_read_timeout(20);
        auto res = client.Get(prefix + path, params, httplib::Headers{{"Accept", "application/json"}});
        if (!res)
            throw Error(ErrorCode::BackendUnavailable,
                        "trait service unreachable: " + httplib::to_string(res.error()), base);
        if (res->status != 200)
            throw Error(ErrorCode::BackendUnavailable,
                        "trait service answered HTTP " + std::to_string(res->status), base);
        try {
            return Json::parse(res->body);
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::BackendUnavailable, std::string("trait service sent invalid JSON: ") + e.what(),
                        base);
        }
    }

    Json cypher(const std::string& query) { return get("/service/cypher", {{"query", query}}); }

    static std::string page_id(const std::string& taxon_id)
    {
        // page ids are numeric; anything else could not be spliced into a query safely
        if (taxon_id.empty() ||
            !std::all_of(taxon_id.begin(), taxon_id.end(), [](unsigned char c) { return std::isdigit(c); }))
            throw Error(ErrorCode::UnknownTaxon, "unknown taxon '" + taxon_id + "'", taxon_id);
        return taxon_id;
    }

    std::vector<TraitRecord> load_traits(const std::string& taxon_id)
    {
        auto id = page_id(taxon_id);
        Json rows = cypher("MATCH (p:Page {page_id: " + id +
                           "})-[:trait]->(t:Trait)-[:predicate]->(pred:Term) "
                           "OPTIONAL MATCH (t)-[:units_term]->(u:Term) "
                           "RETURN pred.name, t.measurement, u.name, t.source");
        std::vector<TraitRecord> out;
        for (const auto& row : rows.value("data", Json::array())) {
            if (!row.is_array() || row.size() < 4 || !row[0].is_string())
                continue;
            double value;
            if (row[1].is_number())
                value = row[1].get<double>();
            else if (row[1].is_string())
                value = std::strtod(row[1].get<std::string>().c_str(), nullptr);
            else
                continue;
            TraitRecord r;
            r.taxon_id = taxon_id;
            r.predicate = row[0].get<std::string>();
            r.value = value;
            r.unit = row[2].is_string() ? row[2].get<std::string>() : "";
            r.source = row[3].is_string() ? row[3].get<std::string>() : "";
            out.push_back(std::move(r));
        }
        std::stable_sort(out.begin(), out.end(), [](const TraitRecord& a, const TraitRecord& b) {
            return std::tie(a.predicate, a.source) < std::tie(b.predicate, b.source);
        });
        return out;
    }
};

LiveBackend::LiveBackend(std::string base_url) : impl_(std::make_unique<Impl>(std::move(base_url))) {}

LiveBackend::~LiveBackend() = default;

std::vector<TaxonMatch> LiveBackend::search_taxa(std::string_view query)
{
    std::string q(query);
    if (q.find_first_not_of(" \t\r\n") == std::string::npos)
        throw Error(ErrorCode::EmptyQuery, "species query is empty");
    Json body = impl_->get("/api/search/1.0.json", {{"q", q}});
    std::vector<TaxonMatch> out;
    for (const auto& r : body.value("results", Json::array())) {
        TaxonMatch m;
        const auto& id = r.at("id");
        m.taxon_id = id.is_string() ? id.get<std::string>() : std::to_string(id.get<std::int64_t>());
        m.canonical_name = r.value("title", "");
        out.push_back(std::move(m));
    }
    return out;
}

TaxonMatch LiveBackend::taxon(const std::string& taxon_id)
{
    auto id = Impl::page_id(taxon_id);
    Json page = impl_->cypher("MATCH (p:Page {page_id: " + id + "}) RETURN p.canonical");
    auto rows = page.value("data", Json::array());
    if (rows.empty() || !rows[0].is_array() || rows[0].empty())
        throw Error(ErrorCode::UnknownTaxon, "unknown taxon '" + taxon_id + "'", taxon_id);

    TaxonMatch m;
    m.taxon_id = taxon_id;
    m.canonical_name = rows[0][0].is_string() ? rows[0][0].get<std::string>() : "";
    Json lineage = impl_->cypher("MATCH (p:Page {page_id: " + id +
                                 "})-[:parent*]->(a:Page) RETURN a.canonical, a.rank");
    for (const auto& row : lineage.value("data", Json::array()))
        if (row.is_array() && !row.empty() && row[0].is_string())
            m.ancestry.push_back(row[0].get<std::string>());
    // the query walks leaf -> root
    std::reverse(m.ancestry.begin(), m.ancestry.end());
    return m;
}

std::vector<TraitRecord> LiveBackend::fetch_traits(const std::string& taxon_id)
{
    std::shared_future<std::vector<TraitRecord>> pending;
    std::promise<std::vector<TraitRecord>> promise;
    bool owner = false;
    {
        std::lock_guard lock(impl_->mutex);
        auto it = impl_->inflight.find(taxon_id);
        if (it != impl_->inflight.end()) {
            pending = it->second;
        } else {
            pending = promise.get_future().share();
            impl_->inflight.emplace(taxon_id, pending);
            owner = true;
        }
    }
    if (owner) {
        try {
            promise.set_value(impl_->load_traits(taxon_id));
        } catch (...) {
            promise.set_exception(std::current_exception());
        }
        std::lock_guard lock(impl_->mutex);
        impl_->inflight.erase(taxon_id);
    }
    return pending.get();
}

} // namespace ecoforge::traits
