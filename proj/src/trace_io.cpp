#include "thor/trace_io.hpp"

#include <sstream>

#include "thor/dataset.hpp"
#include "thor/error.hpp"

namespace thor {
namespace {

using json = nlohmann::ordered_json;
using nlohmann::ordered_json;

[[noreturn]] void mismatch(const std::string& why) { throw Error(Errc::SchemaMismatch, why); }

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) mismatch(std::string("missing field \"") + name + "\"");
  return obj[name];
}

template <typename T>
T get_as(const json& obj, const char* name) {
  const json& v = field(obj, name);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    mismatch(std::string("field \"") + name + "\" has the wrong type");
  }
}

std::string get_string(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_string()) mismatch(std::string("field \"") + name + "\" must be a string");
  return v.get<std::string>();
}

ordered_json candidate_to_json(const Candidate& c) {
  ordered_json j;
  j["text"] = c.text;
  j["score"] = c.score;
  return j;
}

Candidate candidate_from_json(const json& j) {
  const json& score = field(j, "score");
  if (!score.is_number()) mismatch("candidate score must be a number");
  return Candidate{get_string(j, "text"), score.get<double>()};
}

}  // namespace

ordered_json chain_config_to_json(const ChainConfig& config) {
  ordered_json j;
  j["voting"] = {{"k", config.voting.k}, {"min_cluster", config.voting.min_cluster}};
  ordered_json decoding;
  decoding["temperature"] = config.decoding.temperature;
  decoding["max_tokens"] = config.decoding.max_tokens;
  decoding["seed"] = config.decoding.seed ? ordered_json(*config.decoding.seed) : ordered_json(nullptr);
  j["decoding"] = std::move(decoding);
  return j;
}

ChainConfig chain_config_from_json(const json& j) {
  ChainConfig config;
  const json& voting = field(j, "voting");
  config.voting.k = get_as<int>(voting, "k");
  config.voting.min_cluster = get_as<int>(voting, "min_cluster");
  const json& decoding = field(j, "decoding");
  config.decoding.temperature = get_as<double>(decoding, "temperature");
  config.decoding.max_tokens = get_as<int>(decoding, "max_tokens");
  const json& seed = field(decoding, "seed");
  if (!seed.is_null()) config.decoding.seed = get_as<std::int64_t>(decoding, "seed");
  return config;
}

ordered_json trace_to_json(const ChainTrace& trace) {
  ordered_json j;
  j["instance_id"] = trace.instance_id;
  j["mode"] = to_string(trace.mode);
  ordered_json hops = ordered_json::array();
  for (const auto& hop : trace.hops) {
    ordered_json h;
    h["step"] = hop.step;
    h["prompt"] = hop.prompt.text;
    ordered_json cands = ordered_json::array();
    for (const auto& c : hop.candidates) cands.push_back(candidate_to_json(c));
    h["candidates"] = std::move(cands);
    ordered_json selected;
    selected["index"] = hop.selected_index;
    selected["text"] = hop.selected.text;
    selected["score"] = hop.selected.score;
    h["selected"] = std::move(selected);
    h["consistency_flag"] = hop.consistency_flag;
    h["context_after"] = hop.context_after.text;
    hops.push_back(std::move(h));
  }
  j["hops"] = std::move(hops);
  j["prediction"] = trace.prediction ? ordered_json(to_string(*trace.prediction)) : ordered_json(nullptr);
  ordered_json flags = ordered_json::array();
  for (TraceFlag f : trace.flags) flags.push_back(to_string(f));
  j["flags"] = std::move(flags);
  j["config"] = chain_config_to_json(trace.config);
  if (trace.failure) j["error"] = *trace.failure;
  return j;
}

ChainTrace trace_from_json(const json& j) {
  ChainTrace trace;
  trace.instance_id = get_string(j, "instance_id");
  auto mode = parse_mode(get_string(j, "mode"));
  if (!mode) mismatch("unknown mode");
  trace.mode = *mode;

  const json& hops = field(j, "hops");
  if (!hops.is_array()) mismatch("\"hops\" must be an array");
  for (const auto& h : hops) {
    HopRecord hop;
    hop.step = get_as<int>(h, "step");
    hop.prompt.text = get_string(h, "prompt");
    const json& cands = field(h, "candidates");
    if (!cands.is_array()) mismatch("\"candidates\" must be an array");
    for (const auto& c : cands) hop.candidates.push_back(candidate_from_json(c));
    const json& selected = field(h, "selected");
    hop.selected_index = get_as<std::size_t>(selected, "index");
    hop.selected = candidate_from_json(selected);
    if (hop.selected_index >= hop.candidates.size() || hop.candidates[hop.selected_index] != hop.selected) {
      mismatch("selected candidate does not match candidates[index]");
    }
    hop.consistency_flag = get_as<bool>(h, "consistency_flag");
    hop.context_after = HopContext{hop.step, get_string(h, "context_after")};
    trace.hops.push_back(std::move(hop));
  }

  const json& prediction = field(j, "prediction");
  if (!prediction.is_null()) {
    if (!prediction.is_string()) mismatch("\"prediction\" must be a label or null");
    trace.prediction = parse_polarity(prediction.get<std::string>());
    if (!trace.prediction) mismatch("unknown prediction label");
  }
  const json& flags = field(j, "flags");
  if (!flags.is_array()) mismatch("\"flags\" must be an array");
  for (const auto& f : flags) {
    auto flag = f.is_string() ? parse_trace_flag(f.get<std::string>()) : std::nullopt;
    if (!flag) mismatch("unknown trace flag");
    trace.flags.insert(*flag);
  }
  ChainConfig config = chain_config_from_json(field(j, "config"));
  config.mode = trace.mode;
  trace.config = config;
  if (j.contains("error")) trace.failure = get_string(j, "error");
  if (!trace.failure && !trace.prediction) mismatch("trace without an error must carry a prediction");
  return trace;
}

namespace {

ordered_json header_record(const ordered_json& run_config) {
  ordered_json header;
  header["format"] = kTraceFormat;
  header["version"] = kTraceVersion;
  header["config"] = run_config;
  return header;
}

}  // namespace

std::string format_trace_file(const ordered_json& run_config, std::span<const ChainTrace> traces) {
  std::string out = header_record(run_config).dump() + '\n';
  for (const auto& t : traces) out += trace_to_json(t).dump() + '\n';
  return out;
}

TraceFile parse_trace_file(std::string_view jsonl) {
  TraceFile file;
  std::istringstream in{std::string(jsonl)};
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json obj = json::parse(text);
      if (!have_header) {
        if (get_string(obj, "format") != kTraceFormat) mismatch("not a trace file");
        if (get_as<int>(obj, "version") != kTraceVersion) mismatch("unsupported trace version");
        file.config = field(obj, "config");
        have_header = true;
        continue;
      }
      file.traces.push_back(trace_from_json(obj));
    } catch (const json::parse_error& e) {
      throw Error(Errc::SchemaMismatch, "line " + std::to_string(line) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::SchemaMismatch, "line " + std::to_string(line) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(Errc::SchemaMismatch, "line 1: missing trace header");
  return file;
}

TraceFile read_traces(const std::filesystem::path& path) { return parse_trace_file(read_file(path)); }

TraceWriter::TraceWriter(const std::filesystem::path& path, const ordered_json& run_config)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(Errc::Io, "cannot write " + path.string());
  put_line(header_record(run_config).dump());
}

void TraceWriter::write(const ChainTrace& trace) { put_line(trace_to_json(trace).dump()); }

void TraceWriter::put_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error(Errc::Io, "short write to " + path_.string());
}

void TraceWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(Errc::Io, "cannot close " + path_.string());
}

}  // namespace thor
