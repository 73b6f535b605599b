#pragma once

// Trace JSONL: a header record followed by one ChainTrace per line.
//
//   {"format":"thor-trace","version":1,"config":{...}}
//   {"instance_id":...,"mode":...,"hops":[...],"prediction":...,"flags":[...],"config":{...}}

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "thor/chain.hpp"

namespace thor {

inline constexpr std::string_view kTraceFormat = "thor-trace";
inline constexpr int kTraceVersion = 1;

nlohmann::ordered_json chain_config_to_json(const ChainConfig& config);
ChainConfig chain_config_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json trace_to_json(const ChainTrace& trace);

/// Throws SchemaMismatch naming the offending field.
ChainTrace trace_from_json(const nlohmann::ordered_json& j);

struct TraceFile {
  nlohmann::ordered_json config;  // run config echoed in the header
  std::vector<ChainTrace> traces;
};

std::string format_trace_file(const nlohmann::ordered_json& run_config,
                              std::span<const ChainTrace> traces);

/// Throws Io or SchemaMismatch (with line number).
TraceFile read_traces(const std::filesystem::path& path);
TraceFile parse_trace_file(std::string_view jsonl);

/// Streams traces to disk as they arrive.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, const nlohmann::ordered_json& run_config);

  void write(const ChainTrace& trace);
  void close();

 private:
  void put_line(const std::string& line);

  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace thor
