#include "thor/backend.hpp"

#include <cmath>
#include <thread>

#include "thor/error.hpp"
#include "thor/http_backend.hpp"
#include "thor/mock_backend.hpp"

namespace thor {
namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\n\r\v\f";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

// --- TokenBucket / InFlightGate ---------------------------------------------

TokenBucket::TokenBucket(double tokens_per_second, double burst)
    : rate_(tokens_per_second), burst_(burst < 1.0 ? 1.0 : burst), tokens_(burst_), last_(Clock::now()) {}

void TokenBucket::refill(Clock::time_point now) {
  std::chrono::duration<double> elapsed = now - last_;
  tokens_ = std::min(burst_, tokens_ + elapsed.count() * rate_);
  last_ = now;
}

void TokenBucket::acquire() {
  if (rate_ <= 0.0) return;
  std::unique_lock lock(mutex_);
  for (;;) {
    refill(Clock::now());
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

InFlightGate::InFlightGate(int limit) : limit_(limit) {
  if (limit < 1) throw Error(Errc::Config, "max_in_flight must be >= 1");
}

void InFlightGate::enter() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return active_ < limit_; });
  ++active_;
  peak_ = std::max(peak_, active_);
}

void InFlightGate::leave() {
  {
    std::lock_guard lock(mutex_);
    --active_;
  }
  cv_.notify_one();
}

int InFlightGate::peak() const {
  std::lock_guard lock(mutex_);
  return peak_;
}

// --- requests and config ----------------------------------------------------

void GenerationRequest::validate() const {
  if (n < 1) throw Error(Errc::PreconditionViolation, "n must be >= 1, got " + std::to_string(n));
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw Error(Errc::PreconditionViolation, "temperature must be a non-negative real");
  }
  if (temperature == 0.0 && n != 1) {
    throw Error(Errc::PreconditionViolation, "greedy decoding (temperature 0) requires n = 1");
  }
  if (max_tokens < 1) throw Error(Errc::PreconditionViolation, "max_tokens must be >= 1");
  if (prompt.text.empty()) throw Error(Errc::PreconditionViolation, "prompt is empty");
}

void BackendConfig::validate() const {
  if (kind == BackendKind::http) {
    if (!endpoint_url || endpoint_url->empty()) {
      throw Error(Errc::Config, "http backend requires endpoint_url");
    }
    if (!model_name || model_name->empty()) {
      throw Error(Errc::Config, "http backend requires model_name");
    }
  } else if (!mock_script || mock_script->empty()) {
    throw Error(Errc::Config, "mock backend requires a mock script");
  }
  if (max_retries < 0) throw Error(Errc::Config, "max_retries must be >= 0");
  if (max_in_flight < 1) throw Error(Errc::Config, "max_in_flight must be >= 1");
  if (timeout.count() <= 0) throw Error(Errc::Config, "timeout must be positive");
  if (requests_per_second < 0.0) throw Error(Errc::Config, "requests_per_second must be >= 0");
}

std::string_view to_string(BackendKind kind) noexcept {
  return kind == BackendKind::http ? "http" : "mock";
}

// --- Backend ----------------------------------------------------------------

Backend::Backend(int max_in_flight) : gate_(max_in_flight) {}

std::vector<Candidate> Backend::sample_checked(const GenerationRequest& request) {
  std::vector<Candidate> out;
  {
    InFlightGate::Permit permit(gate_);
    out = sample(request);
  }
  if (out.size() != static_cast<std::size_t>(request.n)) {
    throw Error(Errc::MalformedResponse, "asked for " + std::to_string(request.n) +
                                             " generations, got " + std::to_string(out.size()));
  }
  for (auto& c : out) {
    if (!std::isfinite(c.score)) throw Error(Errc::MalformedResponse, "non-finite candidate score");
    c.text = trim(c.text);
  }
  return out;
}

std::vector<Candidate> Backend::generate(const GenerationRequest& request) {
  request.validate();
  std::vector<Candidate> out = sample_checked(request);

  std::vector<std::size_t> blank;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].text.empty()) blank.push_back(i);
  }
  if (blank.empty()) return out;

  GenerationRequest again = request;
  again.n = static_cast<int>(blank.size());
  std::vector<Candidate> refill = sample_checked(again);
  for (std::size_t j = 0; j < blank.size(); ++j) {
    if (refill[j].text.empty()) {
      throw Error(Errc::MalformedResponse, "backend returned a blank generation twice");
    }
    out[blank[j]] = std::move(refill[j]);
  }
  return out;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::http) return std::make_unique<HttpBackend>(config);
  auto mock = std::make_unique<MockBackend>(MockBackend::load_script(*config.mock_script),
                                            config.max_in_flight);
  return mock;
}

}  // namespace thor
