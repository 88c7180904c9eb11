#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "advml/corpus.hpp"
#include "advml/errors.hpp"
#include "advml/oracle.hpp"
#include "advml/protocol.hpp"

using namespace advml;
using nlohmann::json;

namespace {

OracleService make_service(std::size_t per_day = 3) {
    return OracleService(generate_corpus(300, 40, 0.3, 5), TargetKind::naive_bayes, 1, {.calls_per_day = per_day});
}

} // namespace

TEST(HandleRequest, ClassifyAndRateLimit) {
    auto oracle = make_service(1);
    const auto first = handle_request(oracle, json{{"op", "classify"}, {"text", "hello"}});
    ASSERT_TRUE(first.contains("label"));
    EXPECT_TRUE(first["label"] == 1 || first["label"] == 2);
    const auto second = handle_request(oracle, json{{"op", "classify"}, {"text", "hello"}});
    EXPECT_EQ(second, (json{{"error", "rate_limited"}, {"retry_after_days", 1}}));
}

TEST(HandleRequest, AdminOps) {
    auto oracle = make_service();
    EXPECT_EQ(handle_request(oracle, json{{"op", "advance_day"}}), (json{{"day", 1}}));
    EXPECT_EQ(handle_request(oracle, json{{"op", "feedback"}, {"text", "x"}, {"label", 2}}), (json{{"ok", true}}));
    EXPECT_EQ(oracle.pending_feedback(), 1u);
    EXPECT_EQ(handle_request(oracle, json{{"op", "retrain"}}), (json{{"ok", true}}));
    EXPECT_EQ(handle_request(oracle, json{{"op", "reset"}}), (json{{"ok", true}}));
    const auto stats = handle_request(oracle, json{{"op", "stats"}});
    EXPECT_EQ(stats["day"], 1);
    EXPECT_EQ(stats["calls_per_day"], 3);
}

TEST(HandleRequest, MalformedRequests) {
    auto oracle = make_service();
    EXPECT_EQ(handle_request(oracle, json{{"op", "classify"}, {"text", "  "}})["error"], "invalid_input");
    EXPECT_EQ(handle_request(oracle, json{{"op", "feedback"}, {"text", "x"}, {"label", 3}})["error"], "invalid_input");
    EXPECT_EQ(handle_request(oracle, json{{"op", "explode"}})["error"], "bad_request");
    EXPECT_EQ(handle_request(oracle, json{{"text", "x"}})["error"], "bad_request");
    EXPECT_EQ(handle_request(oracle, json{{"op", "classify"}})["error"], "invalid_input");
    EXPECT_EQ(json::parse(handle_line(oracle, "{not json"))["error"], "bad_request");
    EXPECT_EQ(oracle.stats().calls_used_today, 0u);
}

TEST(ServeStream, OneResponsePerLine) {
    auto oracle = make_service();
    std::istringstream in(R"({"op":"advance_day"}
{"op":"stats"}

{"op":"classify","text":"abc"}
)");
    std::ostringstream out;
    serve_stream(oracle, in, out);
    std::istringstream lines(out.str());
    std::vector<json> responses;
    for (std::string line; std::getline(lines, line);) responses.push_back(json::parse(line));
    ASSERT_EQ(responses.size(), 3u);
    EXPECT_EQ(responses[0]["day"], 1);
    EXPECT_TRUE(responses[2].contains("label"));
}

TEST(RemoteOracle, MirrorsInProcessOracle) {
    auto served = make_service(4);
    auto local = make_service(4);
    OracleServer server(served);
    RemoteOracle remote("127.0.0.1", server.port());
    for (const char* text : {"alpha beta", "gamma", "delta epsilon", "zeta"})
        EXPECT_EQ(remote.classify(text), local.classify(text));
    EXPECT_THROW(remote.classify("more"), RateLimitedError);
    EXPECT_THROW(remote.classify(" "), InputError);
    EXPECT_EQ(remote.advance_day(), 1);
    EXPECT_EQ(remote.stats(), (OracleStats{0, 4, 1, 4}));
    remote.submit_feedback("alpha", Label::two);
    EXPECT_EQ(served.pending_feedback(), 1u);
    remote.retrain();
    remote.reset();
    EXPECT_EQ(served.current_model(), served.original_model());
}

TEST(RemoteOracle, ConcurrentClients) {
    auto served = make_service(100000);
    OracleServer server(served);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&] {
            RemoteOracle remote("127.0.0.1", server.port());
            for (int i = 0; i < 50; ++i) remote.classify("text " + std::to_string(i));
        });
    for (auto& t : threads) t.join();
    EXPECT_EQ(served.stats().total_calls, 200u);
}

TEST(RemoteOracle, ConnectFailureIsProtocolError) {
    std::uint16_t port;
    {
        auto served = make_service();
        OracleServer server(served);
        port = server.port();
    }
    EXPECT_THROW(RemoteOracle("127.0.0.1", port), ProtocolError);
}

TEST(RemoteOracle, ParseAddress) {
    EXPECT_EQ(RemoteOracle::parse_address("localhost:7700"), (std::pair<std::string, std::uint16_t>{"localhost", 7700}));
    EXPECT_THROW(RemoteOracle::parse_address("localhost"), InputError);
    EXPECT_THROW(RemoteOracle::parse_address("h:99999"), InputError);
}
