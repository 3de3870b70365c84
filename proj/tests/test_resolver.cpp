#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "citelink/enrich.hpp"

using namespace citelink;
namespace fs = std::filesystem;

namespace {

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};

    TestServer() {
        server.Get(R"(/works/(.+))", [this](const httplib::Request& req,
                                            httplib::Response& res) {
            hits++;
            std::string key = req.matches[1];
            if (key == "10.1234/flaky" && hits <= 2) {
                res.status = 503;
                return;
            }
            if (key == "10.1234/missing") {
                res.status = 404;
                return;
            }
            res.set_content(
                "{\"message\":{\"title\":[\"A Resolved Title\"],"
                "\"type\":\"journal-article\",\"language\":\"en\","
                "\"container-title\":[\"Scientometrics\"]}}",
                "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        thread.join();
    }

    std::string base_url() const {
        return "http://127.0.0.1:" + std::to_string(port);
    }
};

fs::path fresh_cache(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "citelink_resolver_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

size_t cache_entries(const fs::path& dir) {
    size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) ++n;
    return n;
}

}  // namespace

TEST_CASE("resolver retries transient failures and caches exactly once") {
    TestServer srv;
    auto cache = fresh_cache("flaky");
    ResolverConfig cfg;
    cfg.base_url = srv.base_url();
    cfg.cache_dir = cache.string();
    cfg.offline = false;
    cfg.rate_limit_per_sec = 0;  // no throttling in tests
    cfg.backoff_ms = 1;
    ResolverClient client(cfg);

    auto md = client.resolve("10.1234/flaky");
    REQUIRE(md.has_value());
    CHECK(md->title == "A Resolved Title");
    CHECK(md->type == "journal-article");
    CHECK(md->language == "en");
    CHECK(md->container == "Scientometrics");
    CHECK(srv.hits == 3);  // two 503s then success
    CHECK(cache_entries(cache) == 1);

    // second resolve is a pure cache hit
    auto md2 = client.resolve("10.1234/flaky");
    REQUIRE(md2.has_value());
    CHECK(srv.hits == 3);
    CHECK(cache_entries(cache) == 1);
}

TEST_CASE("resolver treats 404 as not-found, cached") {
    TestServer srv;
    auto cache = fresh_cache("missing");
    ResolverConfig cfg;
    cfg.base_url = srv.base_url();
    cfg.cache_dir = cache.string();
    cfg.offline = false;
    cfg.rate_limit_per_sec = 0;
    ResolverClient client(cfg);

    CHECK_FALSE(client.resolve("10.1234/missing").has_value());
    int hits_after = srv.hits;
    CHECK_FALSE(client.resolve("10.1234/missing").has_value());
    CHECK(srv.hits == hits_after);  // negative result served from cache
}

TEST_CASE("offline mode serves only the cache") {
    auto cache = fresh_cache("offline");
    {
        TestServer srv;
        ResolverConfig warm;
        warm.base_url = srv.base_url();
        warm.cache_dir = cache.string();
        warm.offline = false;
        warm.rate_limit_per_sec = 0;
        ResolverClient(warm).resolve("10.1234/known");
    }
    ResolverConfig cfg;
    cfg.cache_dir = cache.string();
    cfg.offline = true;
    ResolverClient client(cfg);
    auto md = client.resolve("10.1234/known");
    REQUIRE(md.has_value());
    CHECK(md->container == "Scientometrics");
    CHECK_FALSE(client.resolve("10.1234/never-seen").has_value());
}

TEST_CASE("resolver gives up with a transient error after max retries") {
    auto cache = fresh_cache("dead");
    ResolverConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";  // nothing listens here
    cfg.cache_dir = cache.string();
    cfg.offline = false;
    cfg.rate_limit_per_sec = 0;
    cfg.max_retries = 1;
    cfg.backoff_ms = 1;
    ResolverClient client(cfg);
    CHECK_THROWS_AS(client.resolve("10.1234/any"), TransientResolverError);
    CHECK(cache_entries(cache) == 0);
}

TEST_CASE("enrich_records fills metadata through the resolver") {
    TestServer srv;
    auto cache = fresh_cache("enrich");
    ResolverConfig cfg;
    cfg.base_url = srv.base_url();
    cfg.cache_dir = cache.string();
    cfg.offline = false;
    cfg.rate_limit_per_sec = 0;
    ResolverClient client(cfg);

    CitingRecord r;
    r.record_id = "g1";
    r.url = "https://x.org/10.1234/found?utm=1";
    r.title_norm = "some title";
    std::vector<CitingRecord> records = {r};
    std::vector<std::string> log;
    enrich_records(records, &client, {}, {}, log);
    CHECK(records[0].doi == "10.1234/found");
    CHECK(records[0].doc_type == DocumentType::JOURNAL);  // journal-article
    CHECK(records[0].language == "en");
    CHECK(records[0].venue == "Scientometrics");

    // a present DOI is never overwritten; the conflict is logged
    CitingRecord r2;
    r2.record_id = "g2";
    r2.doi = "10.1234/original";
    r2.url = "https://x.org/10.1234/different";
    r2.title_norm = "t";
    std::vector<CitingRecord> recs2 = {r2};
    std::vector<std::string> log2;
    enrich_records(recs2, nullptr, {}, {}, log2);
    CHECK(recs2[0].doi == "10.1234/original");
    REQUIRE(log2.size() == 1);
}
