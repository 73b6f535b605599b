#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thor/candidate.hpp"
#include "thor/prompt.hpp"
#include "thor/rate_limit.hpp"

namespace thor {

/// Identifies which instance and hop a request belongs to. The scripted mock
/// keys its replies on it; HTTP backends ignore it. Single-prompt modes use
/// step 0.
struct RequestTag {
  std::string instance_id;
  int step = 0;
};

struct GenerationRequest {
  PromptText prompt;
  int n = 1;
  double temperature = 0.9;
  int max_tokens = 256;
  std::optional<std::int64_t> seed;  // recorded only, never sent
  RequestTag tag;

  /// Throws PreconditionViolation.
  void validate() const;
};

enum class BackendKind { http, mock };

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::optional<std::string> endpoint_url;
  std::optional<std::string> model_name;
  std::string api_key_env = "THOR_API_KEY";
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1'000};
  int max_in_flight = 8;
  double requests_per_second = 0.0;  // 0 disables the token bucket
  std::optional<std::string> mock_script;

  /// Throws Config.
  void validate() const;
};

/// Uniform text-generation interface.
///
/// generate() validates the request, trims every candidate, and re-asks the
/// backend once for any whitespace-only generations. A second blank reply is
/// a MalformedResponse. Concrete backends implement sample().
class Backend {
 public:
  explicit Backend(int max_in_flight);
  virtual ~Backend() = default;

  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  std::vector<Candidate> generate(const GenerationRequest& request);

  int max_in_flight() const noexcept { return gate_.limit(); }
  int peak_in_flight() const { return gate_.peak(); }

 protected:
  /// Must return exactly request.n candidates in backend order.
  virtual std::vector<Candidate> sample(const GenerationRequest& request) = 0;

 private:
  std::vector<Candidate> sample_checked(const GenerationRequest& request);

  InFlightGate gate_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

std::string_view to_string(BackendKind kind) noexcept;

}  // namespace thor
