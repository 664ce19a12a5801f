#include <doctest.h>

#include <cstdlib>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "kframes/annotation.hpp"
#include "kframes/hash.hpp"
#include "kframes/llm_client.hpp"
#include "kframes/prompts.hpp"

using namespace kframes;
using nlohmann::json;

namespace {

struct ScriptedTransport : Transport {
  std::deque<HttpReply> replies;
  std::vector<std::string> paths;
  std::vector<HttpHeaders> headers;
  std::mutex mutex;

  HttpReply post(const std::string& path, const std::string&, const HttpHeaders& h, double) override {
    std::lock_guard lock(mutex);
    paths.push_back(path);
    headers.push_back(h);
    if (replies.empty()) return {500, "exhausted", {}};
    auto r = replies.front();
    replies.pop_front();
    return r;
  }
};

ProviderConfig http_config(int retries = 3) {
  ProviderConfig c;
  c.endpoint = "http://127.0.0.1:1";
  c.credential_env = "KFRAMES_TEST_KEY";
  c.max_retries = retries;
  return c;
}

struct EnvKey {
  EnvKey() { ::setenv("KFRAMES_TEST_KEY", "secret-token", 1); }
  ~EnvKey() { ::unsetenv("KFRAMES_TEST_KEY"); }
};

}  // namespace

TEST_CASE("hash helpers are stable") {
  static_assert(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
  CHECK(mix64(1) != mix64(2));
}

TEST_CASE("mock completion is deterministic per seed") {
  MockProvider a(7);
  MockProvider b(7);
  MockProvider c(8);
  const VideoMeta meta{"vid", 40, std::nullopt, {{"s0", {0, 19}}, {"s1", {20, 39}}}};
  const CompletionRequest req{build_caption_prompt(meta), {"vid#0"}, 1};
  const auto ra = a.complete(req);
  CHECK(ra.text == b.complete(req).text);
  CHECK(ra.text != c.complete(req).text);
  CHECK(ra.request_id == 1);
  CHECK(a.calls() == 1);

  const auto parsed = parse_caption_response(ra.text, meta);
  CHECK(parsed.scenes.size() == 2);
  CHECK_FALSE(parsed.video_summary.empty());

  const auto rel_prompt = build_relevance_prompt("what?", std::nullopt,
                                                 {{"s0", {0, 19}, "x"}, {"s1", {20, 39}, "y"}});
  const auto scores = parse_relevance_response(a.complete({rel_prompt, {}, 2}).text);
  REQUIRE(scores.size() == 2);
  for (const auto& s : scores) {
    CHECK(s.relevance_score >= 1);
    CHECK(s.relevance_score <= 5);
  }
}

TEST_CASE("mock similarity is deterministic, in range and order preserving") {
  MockProvider m(3);
  std::vector<std::string> refs;
  for (int i = 0; i < 500; ++i) refs.push_back("vid#" + std::to_string(i));
  const auto sims = m.similarity("a query", refs);
  REQUIRE(sims.size() == refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    CHECK(sims[i] >= -1.0);
    CHECK(sims[i] <= 1.0);
    CHECK(sims[i] == m.similarity("a query", refs[i]));
  }
  std::vector<std::string> reversed(refs.rbegin(), refs.rend());
  const auto back = m.similarity("a query", reversed);
  CHECK(back.front() == sims.back());
}

TEST_CASE("mock endpoint options") {
  const auto m = MockProvider::from_endpoint("mock:seed=42&malformed=vid_x");
  CHECK(m->seed() == 42);
  const VideoMeta meta{"vid_x", 10, std::nullopt, {{"s0", {0, 9}}}};
  const auto r = m->complete({build_caption_prompt(meta), {}, 0});
  CHECK_THROWS_AS(strip_json_payload(r.text), Error);
  CHECK(MockProvider::from_endpoint("mock:")->seed() == 0);
  CHECK_THROWS_AS(MockProvider::from_endpoint("mock:seed=abc"), Error);
}

TEST_CASE("batch results come back in request order") {
  MockProvider m(1);
  std::vector<CompletionRequest> reqs;
  for (std::uint64_t i = 0; i < 40; ++i) reqs.push_back({"prompt " + std::to_string(i), {}, i});
  const auto out = m.complete_batch(reqs, 4);
  REQUIRE(out.size() == reqs.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].request_id == i);
    CHECK(out[i].text == m.complete(reqs[i]).text);
  }
}

TEST_CASE("retries 429 twice then succeeds") {
  EnvKey key;
  auto t = std::make_unique<ScriptedTransport>();
  t->replies = {{429, "slow down", {}}, {429, "slow down", {}}, {200, R"({"text": "done"})", {}}};
  auto* raw = t.get();
  std::vector<double> sleeps;
  HttpProvider p(http_config(2), std::move(t), [&](std::chrono::duration<double> d) { sleeps.push_back(d.count()); });
  const auto r = p.complete({"hello", {}, 9});
  CHECK(r.text == "done");
  CHECK(r.attempts == 3);
  CHECK(r.status == 200);
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0] <= 1.0);
  CHECK(sleeps[1] <= 2.0);
  CHECK(raw->paths[0] == "/v1/complete");
  CHECK(raw->headers[0].find("Authorization")->second == "Bearer secret-token");
}

TEST_CASE("retry budget is enforced and client errors are not retried") {
  EnvKey key;
  auto t = std::make_unique<ScriptedTransport>();
  t->replies = {{429, "", {}}, {429, "", {}}, {200, R"({"text": "late"})", {}}};
  HttpProvider p(http_config(1), std::move(t), [](auto) {});
  try {
    p.complete({"hello", {}, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RateLimited);
  }

  auto t2 = std::make_unique<ScriptedTransport>();
  t2->replies = {{400, "bad request", {}}, {200, R"({"text": "never"})", {}}};
  auto* raw2 = t2.get();
  HttpProvider p2(http_config(3), std::move(t2), [](auto) {});
  CHECK_THROWS_AS(p2.complete({"hello", {}, 0}), Error);
  CHECK(raw2->paths.size() == 1);

  auto t3 = std::make_unique<ScriptedTransport>();
  t3->replies = {{0, "", "connection refused"}, {503, "", {}}, {200, R"({"similarities": [0.5, -0.25]})", {}}};
  HttpProvider p3(http_config(3), std::move(t3), [](auto) {});
  CHECK(p3.similarity("q", std::vector<std::string>{"a", "b"}) == std::vector<double>{0.5, -0.25});
}

TEST_CASE("missing credential fails before any request") {
  ::unsetenv("KFRAMES_TEST_KEY");
  auto t = std::make_unique<ScriptedTransport>();
  auto* raw = t.get();
  try {
    HttpProvider p(http_config(), std::move(t));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
  CHECK(raw->paths.empty());

  ProviderConfig no_env = http_config();
  no_env.credential_env.clear();
  CHECK_THROWS_AS(make_provider(no_env), Error);
}

TEST_CASE("config validation") {
  ProviderConfig c;
  CHECK_NOTHROW(validate(c));
  c.max_concurrent_requests = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.timeout_seconds = 0.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.max_retries = -1;
  CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("backoff delays stay under the capped exponential ceiling") {
  std::mt19937_64 rng(5);
  const BackoffPolicy p;
  for (int retry = 0; retry < 10; ++retry) {
    const double ceiling = std::min(32.0, std::pow(2.0, retry));
    for (int i = 0; i < 200; ++i) {
      const double d = backoff_delay(p, retry, rng).count();
      CHECK(d >= 0.0);
      CHECK(d <= ceiling);
    }
  }
}

TEST_CASE("http provider talks to a real server") {
  EnvKey key;
  httplib::Server server;
  std::string seen_auth;
  server.Post("/api/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    const auto body = json::parse(req.body);
    res.set_content(json{{"text", "echo:" + body.at("prompt").get<std::string>()}}.dump(), "application/json");
  });
  server.Post("/api/v1/similarity", [&](const httplib::Request& req, httplib::Response& res) {
    const auto n = json::parse(req.body).at("frames").size();
    res.set_content(json{{"similarities", std::vector<double>(n, 0.125)}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ProviderConfig cfg = http_config();
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/api/";
  cfg.timeout_seconds = 5.0;
  auto provider = make_provider(cfg);
  CHECK(provider->complete({"ping", {"f0"}, 0}).text == "echo:ping");
  CHECK(seen_auth == "Bearer secret-token");
  CHECK(provider->similarity("q", std::vector<std::string>{"a", "b", "c"}) == std::vector<double>(3, 0.125));
  CHECK(complete({"pong", {}, 0}, cfg).text == "echo:pong");
  server.stop();
  th.join();
}

TEST_CASE("http provider reports unreachable servers as transport errors") {
  EnvKey key;
  ProviderConfig cfg = http_config(1);
  cfg.endpoint = "http://127.0.0.1:9";
  cfg.timeout_seconds = 1.0;
  HttpProvider p(cfg, nullptr, [](auto) {});
  try {
    p.complete({"ping", {}, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Transport);
  }
}
