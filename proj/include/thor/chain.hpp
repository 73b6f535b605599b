#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "thor/backend.hpp"
#include "thor/candidate.hpp"
#include "thor/consistency.hpp"
#include "thor/polarity.hpp"
#include "thor/prompt.hpp"

namespace thor {

struct Dataset;

enum class Mode { vanilla, zerocot, thor };

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view name) noexcept;

struct DecodingParams {
  double temperature = 0.9;
  int max_tokens = 256;
  std::optional<std::int64_t> seed;

  bool operator==(const DecodingParams&) const = default;
};

struct ChainConfig {
  Mode mode = Mode::thor;
  VotingConfig voting = VotingConfig::with_samples(5);
  DecodingParams decoding;

  bool operator==(const ChainConfig&) const = default;
};

struct HopRecord {
  int step = 1;
  PromptText prompt;
  std::vector<Candidate> candidates;
  std::size_t selected_index = 0;
  Candidate selected;
  bool consistency_flag = false;
  HopContext context_after;

  bool operator==(const HopRecord&) const = default;
};

enum class TraceFlag { unparseable, low_consistency };

std::string_view to_string(TraceFlag flag) noexcept;
std::optional<TraceFlag> parse_trace_flag(std::string_view name) noexcept;

struct ChainTrace {
  std::string instance_id;
  Mode mode = Mode::thor;
  std::vector<HopRecord> hops;
  std::optional<Polarity> prediction;  // empty only for failed traces
  std::set<TraceFlag> flags;
  ChainConfig config;
  std::optional<std::string> failure;  // backend error that stopped the chain

  bool failed() const noexcept { return failure.has_value(); }
  bool operator==(const ChainTrace&) const = default;
};

/// Runs one instance. Backend failures propagate as thor::Error; unparseable
/// final answers never fail (they fall back to neutral and set a flag).
ChainTrace run_chain(const Instance& instance, Backend& backend, const ChainConfig& config);

using TraceSink = std::function<void(ChainTrace&&)>;

/// Runs every instance with up to `parallelism` chains in flight and hands
/// traces to `sink` in dataset order, on the calling thread. Backend failures
/// become failed traces; any other error aborts the batch and is rethrown
/// after in-flight chains drain.
void run_batch(const Dataset& dataset, Backend& backend, const ChainConfig& config, int parallelism,
               const TraceSink& sink);

std::vector<ChainTrace> run_batch(const Dataset& dataset, Backend& backend, const ChainConfig& config,
                                  int parallelism);

}  // namespace thor
