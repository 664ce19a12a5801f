#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kframes {

struct BackoffPolicy {
  double base_seconds = 1.0;
  double factor = 2.0;
  double cap_seconds = 32.0;
};

/// Endpoints starting with "mock:" select the offline mock; options follow as
/// "mock:seed=7&malformed=vid_a,vid_b".
struct ProviderConfig {
  std::string endpoint = "mock:";
  std::string credential_env;  // name of the env var holding the API key
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int max_concurrent_requests = 4;
  BackoffPolicy backoff;
  std::uint64_t jitter_seed = 0;
};

void validate(const ProviderConfig& config);

struct CompletionRequest {
  std::string prompt;
  std::vector<std::string> frame_refs;  // opaque paths or URLs
  std::uint64_t request_id = 0;
};

struct CompletionResponse {
  std::string text;
  int status = 200;
  std::uint64_t request_id = 0;
  int attempts = 1;
};

/// Full-jitter exponential backoff: uniform in [0, min(cap, base * factor^retry)].
template <typename Rng>
std::chrono::duration<double> backoff_delay(const BackoffPolicy& p, int retry, Rng& rng) {
  double ceiling = p.base_seconds;
  for (int i = 0; i < retry && ceiling < p.cap_seconds; ++i) ceiling *= p.factor;
  ceiling = std::min(ceiling, p.cap_seconds);
  std::uniform_real_distribution<double> jitter(0.0, ceiling);
  return std::chrono::duration<double>(jitter(rng));
}

/// Captioner/scorer and similarity source. Implementations are safe to call
/// from several threads.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  /// One cosine-range value per frame, in input order.
  virtual std::vector<double> similarity(std::string_view query, const std::vector<std::string>& frame_refs) = 0;

  double similarity(std::string_view query, const std::string& frame_ref);

  /// Runs requests with at most max_concurrent in flight; responses come back
  /// in request order.
  std::vector<CompletionResponse> complete_batch(const std::vector<CompletionRequest>& requests,
                                                 int max_concurrent);

  std::size_t calls() const noexcept { return calls_.load(); }

 protected:
  void count_call() noexcept { ++calls_; }

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Deterministic, side-effect-free stand-in for both providers. Recognizes
/// caption and relevance prompts and answers them with schema-conforming
/// JSON wrapped in a markdown fence.
class MockProvider : public Provider {
 public:
  explicit MockProvider(std::uint64_t seed = 0, std::set<std::string> malformed_videos = {});
  static std::unique_ptr<MockProvider> from_endpoint(std::string_view endpoint);

  CompletionResponse complete(const CompletionRequest& request) override;
  std::vector<double> similarity(std::string_view query, const std::vector<std::string>& frame_refs) override;
  using Provider::similarity;

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::string caption_reply(const std::string& prompt) const;
  std::string relevance_reply(const std::string& prompt) const;

  std::uint64_t seed_;
  std::set<std::string> malformed_;
};

struct HttpReply {
  int status = 0;  // 0: no response (connection failure or timeout)
  std::string body;
  std::string error;
};

using HttpHeaders = std::multimap<std::string, std::string>;

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply post(const std::string& path, const std::string& body, const HttpHeaders& headers,
                         double timeout_seconds) = 0;
};

/// cpp-httplib backed transport for "http://host:port/base" endpoints (and
/// https when built with OpenSSL).
std::unique_ptr<Transport> make_http_transport(const std::string& endpoint);

using Sleeper = std::function<void(std::chrono::duration<double>)>;

/// JSON-over-HTTP provider:
///   POST {base}/v1/complete   {"prompt", "frames"}  -> {"text"}
///   POST {base}/v1/similarity {"query", "frames"}   -> {"similarities"}
/// Retries transport failures, 429 and 5xx with backoff.
class HttpProvider : public Provider {
 public:
  /// Throws Error(Config) before any network activity if the credential is
  /// missing or the config is invalid.
  HttpProvider(ProviderConfig config, std::unique_ptr<Transport> transport, Sleeper sleeper = {});

  CompletionResponse complete(const CompletionRequest& request) override;
  std::vector<double> similarity(std::string_view query, const std::vector<std::string>& frame_refs) override;
  using Provider::similarity;

 private:
  HttpReply send(const std::string& path, const std::string& body, int& attempts);

  ProviderConfig config_;
  std::unique_ptr<Transport> transport_;
  Sleeper sleeper_;
  std::string credential_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

/// One-shot helper; builds a provider from config for a single request.
CompletionResponse complete(const CompletionRequest& request, const ProviderConfig& config);

}  // namespace kframes
