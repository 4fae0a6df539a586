#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include <doctest.h>

#include "shaml/http.hpp"

#include "shaml/curvedata.hpp"
#include "shaml/errors.hpp"
#include "shaml/lmfdb.hpp"

using namespace shaml;

namespace {

std::string fixture_body() {
    std::ifstream in(std::string(SHAML_DATA_DIR) + "/fixtures/lmfdb_11a1.json");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// serves the frozen 11.a1 API response on a local port
class FixtureServer {
public:
    FixtureServer() {
        server_.Get("/api/ec_curvedata/",
                    [](const httplib::Request&, httplib::Response& res) {
                        res.set_content(fixture_body(), "application/json");
                    });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FixtureServer() {
        server_.stop();
        thread_.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string fresh_cache_dir(const std::string& tag) {
    const std::string dir = "tmp_cache_" + tag;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("fetch by label returns the 11.a1 record") {
    FixtureServer srv;
    LmfdbClient client(srv.base_url(), fresh_cache_dir("label"));
    LmfdbQuery q;
    q.label = "11.a1";
    auto ds = client.fetch(q, 1);
    REQUIRE(ds.size() == 1);
    const auto& rec = ds.records[0];
    CHECK(rec.label == "11.a1");
    CHECK(rec.conductor == 11);
    CHECK(rec.rank == 0);
    // stored sha agrees with the BSD formula
    const double computed = compute_sha_from_bsd(rec);
    CHECK(std::fabs(computed - static_cast<double>(*rec.sha_order)) /
              static_cast<double>(*rec.sha_order) <
          1e-6);
}

TEST_CASE("limit 0 is rejected before any network activity") {
    LmfdbClient client("http://127.0.0.1:1", fresh_cache_dir("zero"));
    CHECK_THROWS_AS(client.fetch({}, 0), EmptyResult);
}

TEST_CASE("limit above the cap is a config error") {
    LmfdbClient client("http://127.0.0.1:1", fresh_cache_dir("cap"));
    CHECK_THROWS_AS(client.fetch({}, LmfdbClient::kMaxLimit + 1), ConfigError);
}

TEST_CASE("client-side filters are enforced on the response") {
    FixtureServer srv;
    LmfdbClient client(srv.base_url(), fresh_cache_dir("filter"));
    LmfdbQuery q;
    q.label = "11.a1";
    q.sha_order = 9;  // fixture has sha 1, so nothing survives the filter
    CHECK_THROWS_AS(client.fetch(q, 5), EmptyResult);

    LmfdbQuery ok;
    ok.conductor_lt = 100;
    ok.sha_order = 1;
    auto ds = client.fetch(ok, 5);
    for (const auto& rec : ds.records) CHECK(*rec.sha_order == 1);
}

TEST_CASE("responses are served from the disk cache on repeat queries") {
    const std::string cache = fresh_cache_dir("repeat");
    LmfdbQuery q;
    q.label = "11.a1";
    {
        FixtureServer srv;
        LmfdbClient client(srv.base_url(), cache);
        auto ds = client.fetch(q, 1);
        CHECK(ds.size() == 1);
    }
    // server gone; the cached body must still satisfy the query
    LmfdbClient offline("http://127.0.0.1:1", cache);
    auto ds = offline.fetch(q, 1);
    CHECK(ds.size() == 1);
    CHECK(ds.records[0].label == "11.a1");
    // an uncached query now fails with a network error
    LmfdbQuery other;
    other.rank = 0;
    CHECK_THROWS_AS(offline.fetch(other, 1), NetworkError);
}

TEST_CASE("parse_response reports missing fields as schema drift") {
    CHECK_THROWS_AS(LmfdbClient::parse_response("{\"rows\":[]}", "t"), SchemaDrift);
    CHECK_THROWS_AS(
        LmfdbClient::parse_response("{\"data\":[{\"conductor\":11}]}", "t"),
        SchemaDrift);
    CHECK_THROWS_AS(LmfdbClient::parse_response("not json", "t"), SchemaDrift);
    auto ds = LmfdbClient::parse_response(fixture_body(), "fixture");
    CHECK(ds.size() == 1);
    CHECK(ds.source == "fixture");
}
