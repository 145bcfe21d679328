#include <doctest.h>

#include <atomic>
#include <thread>

// Must match the build configuration jargon_core compiled httplib with.
#ifdef JARGON_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "../support/temp_dir.hpp"
#include "jargon/errors.hpp"
#include "jargon/llmgate.hpp"

using namespace jargon;
using jargon_tests::TempDir;
using jargon_tests::write_text_file;
using json = nlohmann::json;

TEST_SUITE_BEGIN("llmgate");

namespace {

CompletionRequest make_request(const std::string& model, double temperature, int n,
                               const std::string& user_content) {
    CompletionRequest request;
    request.config = SamplingConfig::make(model, temperature, n);
    request.messages = {{"user", user_content}};
    return request;
}

std::string fixture_line(const CompletionRequest& request,
                         const std::vector<std::string>& samples) {
    json obj = {{"request_key", request.request_key()}, {"samples", samples}};
    return obj.dump() + "\n";
}

}  // namespace

TEST_CASE("sampling config enforces the temperature-0 rule") {
    SamplingConfig config = SamplingConfig::make("gpt-4", 0.5, 20);
    CHECK(config.max_tokens == 256);
    CHECK(config.top_p == 1.0);
    CHECK(config.frequency_penalty == 0.0);
    CHECK(config.presence_penalty == 0.0);

    CHECK_THROWS_AS(SamplingConfig::make("gpt-4", 0.0, 2), ConfigError);
    CHECK_THROWS_AS(SamplingConfig::make("gpt-4", 1.5, 1), ConfigError);
    CHECK_THROWS_AS(SamplingConfig::make("gpt-4", -0.1, 1), ConfigError);
    CHECK_THROWS_AS(SamplingConfig::make("gpt-4", 0.5, 0), ConfigError);
    CHECK_THROWS_AS(SamplingConfig::make("", 0.5, 1), ConfigError);
    CHECK_NOTHROW(SamplingConfig::make("gpt-4", 0.0, 1));
}

TEST_CASE("request keys are content hashes") {
    CompletionRequest a = make_request("gpt-4", 0.5, 20, "hello");
    CHECK(a.request_key() == make_request("gpt-4", 0.5, 20, "hello").request_key());
    CHECK(a.request_key() != make_request("gpt-4", 0.7, 20, "hello").request_key());
    CHECK(a.request_key() != make_request("gpt-4", 0.5, 19, "hello").request_key());
    CHECK(a.request_key() != make_request("gpt-3.5-turbo", 0.5, 20, "hello").request_key());
    CHECK(a.request_key() != make_request("gpt-4", 0.5, 20, "hello!").request_key());

    CompletionRequest with_system = a;
    with_system.messages.insert(with_system.messages.begin(), {"system", "persona"});
    CHECK(a.request_key() != with_system.request_key());
}

TEST_CASE("mock backend replays scripted samples and caches them") {
    TempDir dir;
    CompletionRequest request = make_request("mock-gpt", 0.0, 1, "sentence one");
    write_text_file(dir.file("fixtures.jsonl"), fixture_line(request, {"['a']"}));

    GatewayOptions options;
    options.mock_fixtures_path = dir.file("fixtures.jsonl");
    options.cache_path = dir.file("cache.jsonl");
    Gateway gateway(options);
    CHECK(gateway.offline());

    CompletionBatch first = gateway.complete(request);
    CHECK(first.samples == std::vector<std::string>{"['a']"});
    CHECK(first.provenance == Provenance::mock);

    CompletionBatch second = gateway.complete(request);
    CHECK(second.samples == first.samples);
    CHECK(second.provenance == Provenance::cache);
    CHECK(gateway.cache_hits() == 1);
    CHECK(gateway.live_calls() == 0);

    SUBCASE("unscripted keys are errors") {
        CompletionRequest other = make_request("mock-gpt", 0.0, 1, "sentence two");
        CHECK_THROWS_AS(gateway.complete(other), TransportError);
    }
    SUBCASE("sample count must match n") {
        CompletionRequest wide = make_request("mock-gpt", 1.0, 3, "sentence three");
        write_text_file(dir.file("bad.jsonl"), fixture_line(wide, {"['a']"}));
        GatewayOptions bad_options;
        bad_options.mock_fixtures_path = dir.file("bad.jsonl");
        Gateway bad(bad_options);
        CHECK_THROWS_AS(bad.complete(wide), ValidationError);
    }
}

TEST_CASE("cache survives across gateway instances, byte-identical") {
    TempDir dir;
    CompletionRequest request = make_request("mock-gpt", 1.0, 2, "cache me");
    write_text_file(dir.file("fixtures.jsonl"),
                    fixture_line(request, {"['x']", "prose then ['y']"}));

    {
        GatewayOptions options;
        options.mock_fixtures_path = dir.file("fixtures.jsonl");
        options.cache_path = dir.file("cache.jsonl");
        Gateway gateway(options);
        gateway.complete(request);
    }

    GatewayOptions replay;
    replay.cache_only = true;
    replay.cache_path = dir.file("cache.jsonl");
    Gateway gateway(replay);
    CHECK(gateway.offline());
    CompletionBatch batch = gateway.complete(request);
    CHECK(batch.provenance == Provenance::cache);
    CHECK(batch.samples == std::vector<std::string>{"['x']", "prose then ['y']"});

    CompletionRequest missing = make_request("mock-gpt", 0.0, 1, "never ran");
    CHECK_THROWS_AS(gateway.complete(missing), CacheMissError);
    try {
        gateway.complete(missing);
    } catch (const CacheMissError& ex) {
        CHECK(ex.request_key() == missing.request_key());
    }
}

TEST_CASE("corrupt cache lines are skipped") {
    TempDir dir;
    CompletionRequest request = make_request("mock-gpt", 0.0, 1, "good line");
    json good = {{"request_key", request.request_key()},
                 {"samples", std::vector<std::string>{"['ok']"}},
                 {"provenance", "mock"},
                 {"created_unix", 0}};
    write_text_file(dir.file("cache.jsonl"), "{not json\n" + good.dump() + "\n");

    GatewayOptions options;
    options.cache_only = true;
    options.cache_path = dir.file("cache.jsonl");
    Gateway gateway(options);
    CHECK(gateway.complete(request).samples == std::vector<std::string>{"['ok']"});
}

TEST_CASE("plan_requests enumerates the grid") {
    Corpus corpus = parse_corpus(bundled_corpus_text());

    SUBCASE("temperature 0, no roles: one request per sentence with n = 1") {
        RunMatrix matrix;
        matrix.models = {"gpt-4"};
        matrix.temperatures = {0.0};
        auto plan = plan_requests(corpus, matrix);
        CHECK(plan.size() == 20);
        for (const PlannedRequest& planned : plan) {
            CHECK(planned.request.config.n == 1);
            CHECK_FALSE(planned.cell.role.has_value());
            CHECK(planned.request.messages.size() == 1);
        }
    }

    SUBCASE("role axis over 14 groups plus no-role gives 300 requests with n = 20") {
        RunMatrix matrix;
        matrix.models = {"gpt-4"};
        matrix.temperatures = {1.0};
        matrix.role_groups.assign(kAllGroups.begin(), kAllGroups.end());
        auto plan = plan_requests(corpus, matrix);
        CHECK(plan.size() == 300);
        int with_persona = 0;
        for (const PlannedRequest& planned : plan) {
            CHECK(planned.request.config.n == 20);
            if (planned.cell.role) {
                ++with_persona;
                REQUIRE(planned.request.messages.size() == 2);
                CHECK(planned.request.messages[0].role == "system");
                CHECK(planned.request.messages[0].content ==
                      persona_for(*planned.cell.role).text);
            }
        }
        CHECK(with_persona == 14 * 20);
    }

    SUBCASE("exemplar requests use n = 4 at temperature 1") {
        RunMatrix matrix;
        matrix.models = {"gpt-4"};
        matrix.temperatures = {1.0};
        matrix.icl_axis = {true};
        FoldPlan plan = build_fold_plan(corpus, 0);
        std::set<UnitKey> pooled = {corpus.sentence(1).units[1].key()};
        auto requests = plan_requests(corpus, matrix, &plan, nullptr, &pooled);
        CHECK(requests.size() == 20);
        for (const PlannedRequest& planned : requests) {
            CHECK(planned.request.config.n == 4);
            CHECK(planned.cell.icl);
            CHECK(planned.request.messages.back().content.find("Input: ") != std::string::npos);
        }
    }

    SUBCASE("empty axes are configuration errors") {
        RunMatrix matrix;
        CHECK_THROWS_AS(plan_requests(corpus, matrix), ConfigError);
        matrix.models = {"gpt-4"};
        matrix.temperatures = {};
        CHECK_THROWS_AS(plan_requests(corpus, matrix), ConfigError);
        matrix.temperatures = {0.5};
        matrix.include_no_role = false;
        CHECK_THROWS_AS(plan_requests(corpus, matrix), ConfigError);
    }

    SUBCASE("planning is deterministic") {
        RunMatrix matrix;
        matrix.models = {"a", "b"};
        matrix.temperatures = {0.0, 1.0};
        matrix.role_groups = {Group::GenderF};
        auto first = plan_requests(corpus, matrix);
        auto second = plan_requests(corpus, matrix);
        REQUIRE(first.size() == second.size());
        for (size_t i = 0; i < first.size(); ++i)
            CHECK(first[i].request.request_key() == second[i].request.request_key());
    }
}

TEST_CASE("cell slugs are filesystem-safe and distinct") {
    CellDescriptor a{"gpt-3.5-turbo", 0.5, Group::EduLeHS, false};
    CHECK(a.slug() == "gpt-3.5-turbo_t0.5_role-leHS_noicl");
    CellDescriptor b{"scispacy", std::nullopt, std::nullopt, false};
    CHECK(b.slug() == "scispacy_tNA_norole_noicl");
    CellDescriptor c{"gpt-4", 1.0, Group::Age65Plus, true};
    CHECK(c.slug() == "gpt-4_t1.0_role-65plus_icl");
}

TEST_CASE("live endpoint: n samples, retries, and credential failures") {
    httplib::Server server;
    std::atomic<int> calls{0};
    std::atomic<bool> fail_first{true};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        if (req.get_header_value("Authorization") != "Bearer test-key") {
            res.status = 401;
            res.set_content("{\"error\":{\"message\":\"bad key\"}}", "application/json");
            return;
        }
        if (fail_first.exchange(false)) {
            res.status = 500;
            res.set_content("{\"error\":{\"message\":\"flaky\"}}", "application/json");
            return;
        }
        json body = json::parse(req.body);
        int n = body.value("n", 1);
        json choices = json::array();
        for (int i = 0; i < n; ++i)
            choices.push_back({{"index", i},
                               {"message", {{"role", "assistant"},
                                            {"content", "['sample " + std::to_string(i) + "']"}}}});
        res.set_content(json{{"choices", choices}}.dump(), "application/json");
    });

    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir dir;
    GatewayOptions options;
    options.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    options.api_key = "test-key";
    options.cache_path = dir.file("cache.jsonl");
    options.retry.max_attempts = 3;
    options.retry.base_backoff = std::chrono::milliseconds(1);

    {
        Gateway gateway(options);
        CHECK_FALSE(gateway.offline());
        CompletionRequest request = make_request("gpt-test", 0.5, 3, "live call");
        CompletionBatch batch = gateway.complete(request);
        CHECK(batch.provenance == Provenance::live);
        REQUIRE(batch.samples.size() == 3);
        CHECK(batch.samples[0] == "['sample 0']");
        CHECK(calls.load() == 2);  // one 500, one success

        // replay comes from the cache
        CHECK(gateway.complete(request).provenance == Provenance::cache);
        CHECK(calls.load() == 2);
    }

    {
        GatewayOptions bad = options;
        bad.api_key = "wrong";
        bad.cache_path.clear();
        Gateway gateway(bad);
        CHECK_THROWS_AS(gateway.complete(make_request("gpt-test", 0.0, 1, "denied")),
                        CredentialError);
    }

    server.stop();
    server_thread.join();
}

TEST_CASE("run_plan executes every request and replays idempotently") {
    Corpus corpus = parse_corpus("one sentence here\nsecond sentence here\nthird one now");
    RunMatrix matrix;
    matrix.models = {"mock-gpt"};
    matrix.temperatures = {0.0};
    matrix.role_groups = {Group::GenderF};
    auto plan = plan_requests(corpus, matrix);
    REQUIRE(plan.size() == 6);

    TempDir dir;
    std::string fixtures;
    for (const PlannedRequest& planned : plan)
        fixtures += fixture_line(planned.request, {"['fixture']"});
    write_text_file(dir.file("fixtures.jsonl"), fixtures);

    GatewayOptions options;
    options.mock_fixtures_path = dir.file("fixtures.jsonl");
    options.cache_path = dir.file("cache.jsonl");

    {
        Gateway gateway(options);
        auto batches = run_plan(gateway, plan, 3);
        CHECK(batches.size() == 6);
        CHECK(gateway.cache_misses() == 6);
    }
    {
        Gateway gateway(options);
        auto batches = run_plan(gateway, plan, 3);
        CHECK(batches.size() == 6);
        CHECK(gateway.cache_hits() == 6);
        CHECK(gateway.cache_misses() == 0);
        CHECK(gateway.live_calls() == 0);
    }

    SUBCASE("errors name the offending cell") {
        GatewayOptions empty;
        empty.mock_fixtures_path = dir.file("fixtures.jsonl");
        Gateway gateway(empty);
        RunMatrix wider = matrix;
        wider.temperatures = {0.0, 1.0};  // 1.0 requests are unscripted
        auto bigger = plan_requests(corpus, wider);
        try {
            run_plan(gateway, bigger, 2);
            FAIL("expected TransportError");
        } catch (const TransportError& ex) {
            CHECK(std::string(ex.what()).find("grid cell") != std::string::npos);
        }
    }
}

TEST_SUITE_END();
