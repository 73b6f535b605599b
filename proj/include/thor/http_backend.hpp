#pragma once

#include <chrono>
#include <functional>
#include <string>

#include <json.hpp>

#include "thor/backend.hpp"

namespace thor {

/// Client for OpenAI-compatible completion endpoints. The endpoint URL is
/// used as given; a path ending in /chat/completions switches the body from
/// `prompt` to a single-user-message `messages` array.
///
/// Transport failures, timeouts, 408/5xx and 429 are retried up to
/// max_retries times with delays initial_backoff * 2^attempt. Other 4xx
/// responses fail immediately.
class HttpBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(BackendConfig config, Sleeper sleeper = {});

  std::chrono::milliseconds backoff_delay(int attempt) const;

  nlohmann::json build_body(const GenerationRequest& request) const;

  /// Parses a response body into candidates in `choices` order.
  static std::vector<Candidate> parse_response(const std::string& body, bool chat);

  bool chat() const noexcept { return chat_; }

 protected:
  std::vector<Candidate> sample(const GenerationRequest& request) override;

 private:
  BackendConfig config_;
  Sleeper sleeper_;
  TokenBucket bucket_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  bool chat_ = false;
};

}  // namespace thor
