#include "thor/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "thor/error.hpp"

namespace thor {
namespace {

using nlohmann::json;

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Completions API: logprobs.token_logprobs; chat API: logprobs.content[].logprob.
double choice_score(const json& choice) {
  if (!choice.contains("logprobs") || !choice["logprobs"].is_object()) return 0.0;
  const json& lp = choice["logprobs"];
  std::vector<double> values;
  if (lp.contains("token_logprobs") && lp["token_logprobs"].is_array()) {
    for (const auto& v : lp["token_logprobs"]) {
      if (v.is_number()) values.push_back(v.get<double>());
    }
  } else if (lp.contains("content") && lp["content"].is_array()) {
    for (const auto& tok : lp["content"]) {
      if (tok.is_object() && tok.contains("logprob") && tok["logprob"].is_number()) {
        values.push_back(tok["logprob"].get<double>());
      }
    }
  }
  return mean(values);
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config, Sleeper sleeper)
    : Backend(config.max_in_flight),
      config_(std::move(config)),
      sleeper_(std::move(sleeper)),
      bucket_(config_.requests_per_second) {
  config_.validate();
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  const std::string& url = *config_.endpoint_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::Config, "endpoint_url lacks a scheme: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(Errc::Config, "endpoint_url scheme must be http or https: " + url);
  }
  auto path_begin = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_begin);
  path_ = path_begin == std::string::npos ? "/" : url.substr(path_begin);
  chat_ = ends_with(path_, "/chat/completions");
}

std::chrono::milliseconds HttpBackend::backoff_delay(int attempt) const {
  return config_.initial_backoff * (1LL << attempt);
}

json HttpBackend::build_body(const GenerationRequest& request) const {
  json body;
  body["model"] = *config_.model_name;
  if (chat_) {
    body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt.text}}});
    body["logprobs"] = true;
  } else {
    body["prompt"] = request.prompt.text;
    body["logprobs"] = 1;
  }
  body["n"] = request.n;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  return body;
}

std::vector<Candidate> HttpBackend::parse_response(const std::string& body, bool chat) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array()) {
    throw Error(Errc::MalformedResponse, "response has no choices array");
  }
  std::vector<Candidate> out;
  for (const auto& choice : doc["choices"]) {
    if (!choice.is_object()) throw Error(Errc::MalformedResponse, "choice is not an object");
    const json* text = nullptr;
    if (chat) {
      if (choice.contains("message") && choice["message"].is_object() &&
          choice["message"].contains("content")) {
        text = &choice["message"]["content"];
      }
    } else if (choice.contains("text")) {
      text = &choice["text"];
    }
    if (text == nullptr || !text->is_string()) {
      throw Error(Errc::MalformedResponse, "choice carries no text");
    }
    out.push_back(Candidate{text->get<std::string>(), choice_score(choice)});
  }
  return out;
}

std::vector<Candidate> HttpBackend::sample(const GenerationRequest& request) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(Errc::AuthMissing, "environment variable " + config_.api_key_env + " is not set");
  }

  const std::string body = build_body(request).dump();
  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  httplib::Client client(origin_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  Errc last_code = Errc::Transport;
  std::string last_message;
  for (int attempt = 0;; ++attempt) {
    bucket_.acquire();
    auto res = client.Post(path_, headers, body, "application/json");
    bool retriable = true;
    if (!res) {
      last_code = Errc::Transport;
      last_message = "request failed: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      auto candidates = parse_response(res->body, chat_);
      if (candidates.size() != static_cast<std::size_t>(request.n)) {
        throw Error(Errc::MalformedResponse, "asked for " + std::to_string(request.n) +
                                                 " choices, got " + std::to_string(candidates.size()));
      }
      return candidates;
    } else if (res->status == 429) {
      last_code = Errc::RateLimited;
      last_message = "HTTP 429: " + res->body;
    } else {
      last_code = Errc::Transport;
      last_message = "HTTP " + std::to_string(res->status) + ": " + res->body;
      retriable = res->status == 408 || res->status >= 500;
    }

    if (!retriable || attempt >= config_.max_retries) break;
    sleeper_(backoff_delay(attempt));
  }
  throw Error(last_code, last_message);
}

}  // namespace thor
