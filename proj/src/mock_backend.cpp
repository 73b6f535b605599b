#include "thor/mock_backend.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace thor {
namespace {

using nlohmann::json;

[[noreturn]] void bad(std::size_t line, const std::string& why) {
  throw Error(Errc::BadFixture, "line " + std::to_string(line) + ": " + why);
}

std::optional<Errc> parse_fault(const std::string& name) {
  if (name == "transport") return Errc::Transport;
  if (name == "rate_limited") return Errc::RateLimited;
  if (name == "malformed") return Errc::MalformedResponse;
  return std::nullopt;
}

ScriptEntry parse_entry(const json& obj, std::size_t line) {
  static const std::set<std::string> known = {"id", "step", "replies", "scores", "error"};
  if (!obj.is_object()) bad(line, "expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) bad(line, "unknown field \"" + key + "\"");
  }

  ScriptEntry entry;
  if (!obj.contains("id") || !obj["id"].is_string()) bad(line, "\"id\" must be a string");
  entry.id = obj["id"].get<std::string>();
  if (!obj.contains("step") || !obj["step"].is_number_integer()) bad(line, "\"step\" must be an integer");
  entry.step = obj["step"].get<int>();
  if (entry.step < 0 || entry.step > 3) bad(line, "\"step\" must be 0..3");

  if (obj.contains("error")) {
    if (!obj["error"].is_string()) bad(line, "\"error\" must be a string");
    entry.error = parse_fault(obj["error"].get<std::string>());
    if (!entry.error) bad(line, "unknown error kind \"" + obj["error"].get<std::string>() + "\"");
    if (obj.contains("replies") || obj.contains("scores")) {
      bad(line, "a fault entry carries no replies");
    }
    return entry;
  }

  if (!obj.contains("replies") || !obj["replies"].is_array() || obj["replies"].empty()) {
    bad(line, "\"replies\" must be a non-empty array of strings");
  }
  for (const auto& r : obj["replies"]) {
    if (!r.is_string()) bad(line, "\"replies\" must contain strings only");
    entry.replies.push_back(r.get<std::string>());
  }
  if (obj.contains("scores")) {
    const auto& scores = obj["scores"];
    if (!scores.is_array() || scores.size() != entry.replies.size()) {
      bad(line, "\"scores\" must be an array as long as \"replies\"");
    }
    for (const auto& s : scores) {
      if (!s.is_number()) bad(line, "\"scores\" must contain numbers only");
      entry.scores.push_back(s.get<double>());
    }
  }
  return entry;
}

}  // namespace

MockBackend::MockBackend(std::vector<ScriptEntry> script, int max_in_flight) : Backend(max_in_flight) {
  for (auto& entry : script) {
    auto key = std::make_pair(entry.id, entry.step);
    if (script_.contains(key)) {
      throw Error(Errc::BadFixture,
                  "duplicate key (" + entry.id + ", " + std::to_string(entry.step) + ")");
    }
    script_.emplace(std::move(key), Cursor{std::move(entry), 0, false});
  }
}

std::vector<ScriptEntry> MockBackend::parse_script(std::string_view jsonl) {
  std::vector<ScriptEntry> entries;
  std::set<std::pair<std::string, int>> seen;
  std::istringstream in{std::string(jsonl)};
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      bad(line, e.what());
    }
    ScriptEntry entry = parse_entry(obj, line);
    if (!seen.emplace(entry.id, entry.step).second) {
      bad(line, "duplicate key (" + entry.id + ", " + std::to_string(entry.step) + ")");
    }
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw Error(Errc::BadFixture, "fixture has no entries");
  return entries;
}

std::vector<ScriptEntry> MockBackend::load_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::BadFixture, "cannot open mock script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str());
}

std::size_t MockBackend::remaining() const {
  std::lock_guard lock(mutex_);
  std::size_t total = 0;
  for (const auto& [_, cursor] : script_) total += cursor.entry.replies.size() - cursor.next;
  return total;
}

std::vector<Candidate> MockBackend::sample(const GenerationRequest& request) {
  std::lock_guard lock(mutex_);
  const auto& tag = request.tag;
  auto it = script_.find({tag.instance_id, tag.step});
  if (it == script_.end()) {
    throw Error(Errc::ScriptExhausted,
                "no script for (" + tag.instance_id + ", " + std::to_string(tag.step) + ")");
  }
  Cursor& cursor = it->second;
  if (cursor.entry.error) {
    if (cursor.failed) {
      throw Error(Errc::ScriptExhausted, "fault for (" + tag.instance_id + ", " +
                                             std::to_string(tag.step) + ") already delivered");
    }
    cursor.failed = true;
    throw Error(*cursor.entry.error, "scripted fault for (" + tag.instance_id + ", " +
                                         std::to_string(tag.step) + ")");
  }

  const auto& replies = cursor.entry.replies;
  const auto want = static_cast<std::size_t>(request.n);
  if (replies.size() - cursor.next < want) {
    throw Error(Errc::ScriptExhausted,
                "script for (" + tag.instance_id + ", " + std::to_string(tag.step) + ") has " +
                    std::to_string(replies.size() - cursor.next) + " replies left, asked for " +
                    std::to_string(want));
  }
  std::vector<Candidate> out;
  out.reserve(want);
  for (std::size_t i = 0; i < want; ++i, ++cursor.next) {
    double score = cursor.entry.scores.empty() ? 0.0 : cursor.entry.scores[cursor.next];
    out.push_back(Candidate{replies[cursor.next], score});
  }
  return out;
}

}  // namespace thor
