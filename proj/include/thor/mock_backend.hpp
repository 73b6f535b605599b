#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thor/backend.hpp"
#include "thor/error.hpp"

namespace thor {

/// One fixture line: {"id", "step", "replies", "scores"?} or, for fault
/// injection, {"id", "step", "error": "transport"|"rate_limited"|"malformed"}.
struct ScriptEntry {
  std::string id;
  int step = 0;
  std::vector<std::string> replies;
  std::vector<double> scores;  // empty or same length as replies
  std::optional<Errc> error;
};

/// Deterministic scripted backend. Each (instance id, step) key owns a reply
/// list consumed front to back; asking for more than remains is
/// ScriptExhausted. Thread-safe.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::vector<ScriptEntry> script, int max_in_flight = 8);

  /// Parses a JSONL fixture. Throws BadFixture (with line number) on schema
  /// violations, an empty file, or a duplicate key.
  static std::vector<ScriptEntry> load_script(const std::filesystem::path& path);
  static std::vector<ScriptEntry> parse_script(std::string_view jsonl);

  /// Replies not yet consumed, summed over all keys.
  std::size_t remaining() const;

 protected:
  std::vector<Candidate> sample(const GenerationRequest& request) override;

 private:
  struct Cursor {
    ScriptEntry entry;
    std::size_t next = 0;
    bool failed = false;
  };

  std::map<std::pair<std::string, int>, Cursor> script_;
  mutable std::mutex mutex_;
};

}  // namespace thor
