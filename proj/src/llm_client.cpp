#include "kframes/llm_client.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "kframes/error.hpp"
#include "kframes/hash.hpp"
#include "kframes/prompts.hpp"

namespace kframes {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void validate(const ProviderConfig& c) {
  if (c.endpoint.empty()) throw Error(ErrorCode::Config, "provider endpoint is empty");
  if (!(c.timeout_seconds > 0.0)) throw Error(ErrorCode::Config, "timeout must be positive");
  if (c.max_retries < 0) throw Error(ErrorCode::Config, "max_retries must be nonnegative");
  if (c.max_concurrent_requests < 1 || c.max_concurrent_requests > 1024) {
    throw Error(ErrorCode::Config, "max_concurrent_requests must lie in [1,1024]");
  }
  if (!(c.backoff.base_seconds >= 0.0) || !(c.backoff.factor >= 1.0) || !(c.backoff.cap_seconds >= 0.0)) {
    throw Error(ErrorCode::Config, "invalid backoff policy");
  }
}

double Provider::similarity(std::string_view query, const std::string& frame_ref) {
  return similarity(query, std::vector<std::string>{frame_ref}).at(0);
}

std::vector<CompletionResponse> Provider::complete_batch(const std::vector<CompletionRequest>& requests,
                                                         int max_concurrent) {
  std::vector<CompletionResponse> out(requests.size());
  std::vector<std::exception_ptr> errors(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        out[i] = complete(requests[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, max_concurrent)), requests.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---------------------------------------------------------------- mock

MockProvider::MockProvider(std::uint64_t seed, std::set<std::string> malformed_videos)
    : seed_(seed), malformed_(std::move(malformed_videos)) {}

std::unique_ptr<MockProvider> MockProvider::from_endpoint(std::string_view endpoint) {
  if (endpoint.substr(0, 5) != "mock:") throw Error(ErrorCode::Config, "not a mock endpoint");
  std::uint64_t seed = 0;
  std::set<std::string> malformed;
  std::string_view rest = endpoint.substr(5);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const std::string_view kv = rest.substr(0, amp);
    rest = amp == std::string_view::npos ? std::string_view{} : rest.substr(amp + 1);
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    const std::string key(kv.substr(0, eq));
    const std::string value(eq == std::string_view::npos ? std::string_view{} : kv.substr(eq + 1));
    if (key == "seed") {
      char* end = nullptr;
      seed = std::strtoull(value.c_str(), &end, 10);
      if (value.empty() || *end != '\0') throw Error(ErrorCode::Config, "mock seed must be an integer");
    } else if (key == "malformed") {
      std::stringstream ss(value);
      for (std::string id; std::getline(ss, id, ',');) {
        if (!id.empty()) malformed.insert(id);
      }
    } else {
      throw Error(ErrorCode::Config, "unknown mock option '" + key + "'");
    }
  }
  return std::make_unique<MockProvider>(seed, std::move(malformed));
}

namespace {

std::uint64_t keyed_hash(std::uint64_t seed, std::initializer_list<std::string_view> parts) {
  std::uint64_t h = fnv1a(hex64(seed));
  for (auto p : parts) {
    h = fnv1a("\x1f", h);
    h = fnv1a(p, h);
  }
  return mix64(h);
}

std::string fenced(const json& j) {
  return "Here is the analysis.\n```json\n" + j.dump(2) + "\n```\n";
}

}  // namespace

std::string MockProvider::caption_reply(const std::string& prompt) const {
  const auto input = extract_prompt_input(prompt);
  if (!input) return "I could not find the scene list.";
  const std::string video_id = input->value("video_id", std::string{});
  if (malformed_.count(video_id)) return "Sorry, the captioning service produced no usable output {scenes: ...";

  json scenes = json::array();
  std::vector<std::string> ids;
  for (const auto& s : input->at("scenes")) {
    const std::string id = s.at("scene_id").get<std::string>();
    ids.push_back(id);
    scenes.push_back({{"scene_id", id},
                      {"start", s.at("start")},
                      {"end", s.at("end")},
                      {"description", "Scene " + id + " of " + video_id + ", visual signature " +
                                          hex64(keyed_hash(seed_, {video_id, id})).substr(0, 8)}});
  }
  json chapters = json::array();
  for (std::size_t i = 0; i < ids.size(); i += 2) {
    json members = json::array({ids[i]});
    if (i + 1 < ids.size()) members.push_back(ids[i + 1]);
    chapters.push_back({{"chapter_id", "c" + std::to_string(i / 2)},
                        {"scene_ids", members},
                        {"summary", "Chapter " + std::to_string(i / 2) + " of " + video_id}});
  }
  return fenced({{"scenes", scenes}, {"chapters", chapters},
                 {"video_summary", "Mock summary of " + video_id + " with " + std::to_string(ids.size()) + " scenes"}});
}

std::string MockProvider::relevance_reply(const std::string& prompt) const {
  const auto input = extract_prompt_input(prompt);
  if (!input) return "I could not find the scene list.";
  const std::string question = input->value("question", std::string{});
  json entries = json::array();
  for (const auto& s : input->at("scenes")) {
    const std::string id = s.at("scene_id").get<std::string>();
    const int score = 1 + static_cast<int>(keyed_hash(seed_, {question, id}) % 5);
    entries.push_back({{"scene_id", id},
                       {"relevance_score", score},
                       {"reason", "mock relevance " + std::to_string(score) + " for scene " + id}});
  }
  return fenced({{"relevance", entries}});
}

CompletionResponse MockProvider::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw Error(ErrorCode::InvalidInput, "completion prompt is empty");
  count_call();
  CompletionResponse r;
  r.request_id = request.request_id;
  if (request.prompt.find(kCaptionRole) != std::string::npos) {
    r.text = caption_reply(request.prompt);
  } else if (request.prompt.find(kRelevanceRole) != std::string::npos) {
    r.text = relevance_reply(request.prompt);
  } else {
    r.text = "mock:" + hex64(keyed_hash(seed_, {request.prompt}));
  }
  return r;
}

std::vector<double> MockProvider::similarity(std::string_view query, const std::vector<std::string>& frame_refs) {
  count_call();
  std::vector<double> out;
  out.reserve(frame_refs.size());
  for (const auto& f : frame_refs) {
    const std::uint64_t h = keyed_hash(seed_, {query, f});
    // 53 high bits -> [0,1) -> [-1,1)
    out.push_back(2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0);
  }
  return out;
}

// ---------------------------------------------------------------- http

namespace {

class HttplibTransport : public Transport {
 public:
  explicit HttplibTransport(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "endpoint must be a URL: " + endpoint);
    const auto path_start = endpoint.find('/', scheme_end + 3);
    host_ = endpoint.substr(0, path_start);
    base_ = path_start == std::string::npos ? std::string{} : endpoint.substr(path_start);
    while (!base_.empty() && base_.back() == '/') base_.pop_back();
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint.rfind("https://", 0) == 0) {
      throw Error(ErrorCode::Config, "https endpoints need a build with OpenSSL");
    }
#endif
  }

  HttpReply post(const std::string& path, const std::string& body, const HttpHeaders& headers,
                 double timeout_seconds) override {
    httplib::Client client(host_);
    const auto sec = static_cast<time_t>(timeout_seconds);
    const auto usec = static_cast<time_t>((timeout_seconds - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client.Post(base_ + path, h, body, "application/json");
    if (!res) return {0, {}, httplib::to_string(res.error())};
    return {res->status, res->body, {}};
  }

 private:
  std::string host_;
  std::string base_;
};

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& endpoint) {
  return std::make_unique<HttplibTransport>(endpoint);
}

HttpProvider::HttpProvider(ProviderConfig config, std::unique_ptr<Transport> transport, Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      in_flight_(1),
      rng_(config_.jitter_seed) {
  validate(config_);
  if (config_.credential_env.empty()) {
    throw Error(ErrorCode::Config, "no credential environment variable configured for " + config_.endpoint);
  }
  const char* secret = std::getenv(config_.credential_env.c_str());
  if (!secret || !*secret) {
    throw Error(ErrorCode::Config, "credential variable " + config_.credential_env + " is not set");
  }
  credential_ = secret;
  if (!transport_) transport_ = make_http_transport(config_.endpoint);
  if (!sleeper_) sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
  // counting_semaphore has no setter; release the remaining permits.
  in_flight_.release(config_.max_concurrent_requests - 1);
}

HttpReply HttpProvider::send(const std::string& path, const std::string& body, int& attempts) {
  const HttpHeaders headers{{"Authorization", "Bearer " + credential_}};
  HttpReply reply;
  for (int attempt = 0;; ++attempt) {
    {
      in_flight_.acquire();
      reply = transport_->post(path, body, headers, config_.timeout_seconds);
      in_flight_.release();
    }
    attempts = attempt + 1;
    if (reply.status >= 200 && reply.status < 300) return reply;
    if (!retryable(reply.status)) {
      throw Error(ErrorCode::Provider, "provider returned HTTP " + std::to_string(reply.status) + ": " + reply.body);
    }
    if (attempt >= config_.max_retries) break;
    std::chrono::duration<double> delay;
    {
      std::lock_guard lock(rng_mutex_);
      delay = backoff_delay(config_.backoff, attempt, rng_);
    }
    sleeper_(delay);
  }
  const std::string tries = std::to_string(attempts) + " attempt(s)";
  if (reply.status == 0) throw Error(ErrorCode::Transport, "no response after " + tries + ": " + reply.error);
  if (reply.status == 429) throw Error(ErrorCode::RateLimited, "rate limited after " + tries);
  throw Error(ErrorCode::Provider, "provider returned HTTP " + std::to_string(reply.status) + " after " + tries);
}

CompletionResponse HttpProvider::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw Error(ErrorCode::InvalidInput, "completion prompt is empty");
  count_call();
  CompletionResponse r;
  r.request_id = request.request_id;
  const HttpReply reply =
      send("/v1/complete", json{{"prompt", request.prompt}, {"frames", request.frame_refs}}.dump(), r.attempts);
  r.status = reply.status;
  try {
    r.text = json::parse(reply.body).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Provider, std::string("malformed completion body: ") + e.what());
  }
  return r;
}

std::vector<double> HttpProvider::similarity(std::string_view query, const std::vector<std::string>& frame_refs) {
  count_call();
  int attempts = 0;
  const HttpReply reply =
      send("/v1/similarity", json{{"query", query}, {"frames", frame_refs}}.dump(), attempts);
  std::vector<double> out;
  try {
    out = json::parse(reply.body).at("similarities").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Provider, std::string("malformed similarity body: ") + e.what());
  }
  if (out.size() != frame_refs.size()) {
    throw Error(ErrorCode::Provider, "provider returned " + std::to_string(out.size()) + " similarities for " +
                                         std::to_string(frame_refs.size()) + " frames");
  }
  for (double& s : out) {
    if (!(s >= -1.0 && s <= 1.0)) throw Error(ErrorCode::Provider, "similarity outside [-1,1]");
  }
  return out;
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  validate(config);
  if (config.endpoint.rfind("mock:", 0) == 0) {
    return MockProvider::from_endpoint(config.endpoint);
  }
  return std::make_unique<HttpProvider>(config, nullptr);
}

CompletionResponse complete(const CompletionRequest& request, const ProviderConfig& config) {
  return make_provider(config)->complete(request);
}

}  // namespace kframes
