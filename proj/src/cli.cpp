#include "thor/cli.hpp"

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <toml.hpp>

#include "thor/dataset.hpp"
#include "thor/error.hpp"
#include "thor/evaluate.hpp"
#include "thor/finetune.hpp"
#include "thor/trace_io.hpp"

namespace thor::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& why) { throw Error(Errc::Config, why); }

// --- TOML helpers -----------------------------------------------------------

void reject_unknown(const toml::table& table, const std::set<std::string>& known, const std::string& where) {
  for (auto&& [key, _] : table) {
    if (!known.contains(std::string(key.str()))) {
      config_error("unknown key \"" + std::string(key.str()) + "\" in " + where);
    }
  }
}

template <typename T>
std::optional<T> toml_get(const toml::table& table, const char* key, const std::string& where) {
  const toml::node* node = table.get(key);
  if (node == nullptr) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node->value_exact<std::string>()) return *v;
  } else {
    if (auto v = node->value_exact<std::int64_t>()) return static_cast<T>(*v);
  }
  config_error(std::string("\"") + key + "\" in " + where + " has the wrong type");
}

const toml::table* toml_section(const toml::table& root, const char* name) {
  const toml::node* node = root.get(name);
  if (node == nullptr) return nullptr;
  if (!node->is_table()) config_error(std::string("\"") + name + "\" must be a table");
  return node->as_table();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return (path.is_relative() && !base.empty()) ? base / path : path;
}

Mode mode_from(const std::string& name) {
  auto m = parse_mode(name);
  if (!m) config_error("mode must be vanilla, zerocot or thor, got \"" + name + "\"");
  return *m;
}

BackendKind backend_from(const std::string& name) {
  if (name == "http") return BackendKind::http;
  if (name == "mock") return BackendKind::mock;
  config_error("backend must be http or mock, got \"" + name + "\"");
}

std::chrono::milliseconds seconds_to_ms(double s) {
  if (!(s > 0.0)) config_error("timeout must be positive");
  return std::chrono::milliseconds(static_cast<std::int64_t>(s * 1000.0 + 0.5));
}

bool same_file(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

int exit_code_for(const Error& e) {
  if (is_backend_failure(e.code()) || e.code() == Errc::ScriptExhausted) return kBackend;
  return kConfig;
}

std::string label_of(const EvalReport& report, const fs::path& path) {
  if (report.config.is_object() && report.config.contains("mode") && report.config["mode"].is_string()) {
    return report.config["mode"].get<std::string>();
  }
  return path.stem().string();
}

std::string dataset_of(const EvalReport& report) {
  if (report.config.is_object() && report.config.contains("dataset") && report.config["dataset"].is_string()) {
    return fs::path(report.config["dataset"].get<std::string>()).stem().string();
  }
  return "-";
}

}  // namespace

// --- RunConfig --------------------------------------------------------------

void apply_toml(RunConfig& config, std::string_view toml_text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": " << e.description() << " at line " << e.source().begin.line;
    config_error(msg.str());
  }
  fs::path base = config.config_path ? config.config_path->parent_path() : fs::path{};

  reject_unknown(root, {"data", "out", "mode", "parallelism", "seed", "backend", "voting", "decoding"}, source);
  if (auto v = toml_get<std::string>(root, "data", source)) config.dataset_path = resolve(base, *v);
  if (auto v = toml_get<std::string>(root, "out", source)) config.output_path = resolve(base, *v);
  if (auto v = toml_get<std::string>(root, "mode", source)) config.chain.mode = mode_from(*v);
  if (auto v = toml_get<int>(root, "parallelism", source)) config.parallelism = *v;
  if (auto v = toml_get<std::int64_t>(root, "seed", source)) config.chain.decoding.seed = *v;

  if (const toml::table* b = toml_section(root, "backend")) {
    const std::string where = source + " [backend]";
    reject_unknown(*b,
                   {"kind", "endpoint_url", "model_name", "api_key_env", "timeout_seconds", "max_retries",
                    "initial_backoff_ms", "max_in_flight", "requests_per_second", "mock_script"},
                   where);
    auto& be = config.backend;
    if (auto v = toml_get<std::string>(*b, "kind", where)) be.kind = backend_from(*v);
    if (auto v = toml_get<std::string>(*b, "endpoint_url", where)) be.endpoint_url = *v;
    if (auto v = toml_get<std::string>(*b, "model_name", where)) be.model_name = *v;
    if (auto v = toml_get<std::string>(*b, "api_key_env", where)) be.api_key_env = *v;
    if (auto v = toml_get<double>(*b, "timeout_seconds", where)) be.timeout = seconds_to_ms(*v);
    if (auto v = toml_get<int>(*b, "max_retries", where)) be.max_retries = *v;
    if (auto v = toml_get<int>(*b, "initial_backoff_ms", where)) be.initial_backoff = std::chrono::milliseconds(*v);
    if (auto v = toml_get<int>(*b, "max_in_flight", where)) be.max_in_flight = *v;
    if (auto v = toml_get<double>(*b, "requests_per_second", where)) be.requests_per_second = *v;
    if (auto v = toml_get<std::string>(*b, "mock_script", where)) be.mock_script = resolve(base, *v).string();
  }
  if (const toml::table* v = toml_section(root, "voting")) {
    const std::string where = source + " [voting]";
    reject_unknown(*v, {"k", "min_cluster"}, where);
    auto k = toml_get<int>(*v, "k", where);
    auto min_cluster = toml_get<int>(*v, "min_cluster", where);
    if (k) config.chain.voting = VotingConfig::with_samples(*k);
    if (min_cluster) config.chain.voting.min_cluster = *min_cluster;
  }
  if (const toml::table* d = toml_section(root, "decoding")) {
    const std::string where = source + " [decoding]";
    reject_unknown(*d, {"temperature", "max_tokens"}, where);
    if (auto v = toml_get<double>(*d, "temperature", where)) config.chain.decoding.temperature = *v;
    if (auto v = toml_get<int>(*d, "max_tokens", where)) config.chain.decoding.max_tokens = *v;
  }
}

void RunConfig::validate() const {
  if (dataset_path.empty()) config_error("no dataset given (--data)");
  if (output_path.empty()) config_error("no output path given (--out)");
  backend.validate();
  chain.voting.validate();
  GenerationRequest probe;
  probe.prompt.text = "probe";
  probe.n = chain.voting.k;
  probe.temperature = chain.decoding.temperature;
  probe.max_tokens = chain.decoding.max_tokens;
  try {
    probe.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (parallelism < 1 || parallelism > backend.max_in_flight) {
    config_error("parallelism must lie in [1, max_in_flight=" + std::to_string(backend.max_in_flight) + "]");
  }

  std::vector<std::pair<std::string, fs::path>> paths = {{"dataset", dataset_path}, {"output", output_path}};
  if (config_path) paths.emplace_back("config", *config_path);
  if (backend.kind == BackendKind::mock && backend.mock_script) paths.emplace_back("mock script", *backend.mock_script);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      if (same_file(paths[i].second, paths[j].second)) {
        config_error(paths[i].first + " and " + paths[j].first + " paths must differ");
      }
    }
  }
}

ordered_json RunConfig::snapshot() const {
  ordered_json j;
  j["mode"] = to_string(chain.mode);
  j["dataset"] = dataset_path.string();
  ordered_json be;
  be["kind"] = to_string(backend.kind);
  if (backend.kind == BackendKind::http) {
    be["endpoint_url"] = *backend.endpoint_url;
    be["model_name"] = *backend.model_name;
    be["api_key_env"] = backend.api_key_env;
    be["timeout_ms"] = backend.timeout.count();
    be["max_retries"] = backend.max_retries;
    be["initial_backoff_ms"] = backend.initial_backoff.count();
    be["requests_per_second"] = backend.requests_per_second;
  } else {
    be["mock_script"] = *backend.mock_script;
  }
  j["backend"] = std::move(be);
  const ordered_json chain_json = chain_config_to_json(chain);
  for (const auto& [key, value] : chain_json.items()) j[key] = value;
  return j;
}

// --- subcommands ------------------------------------------------------------

namespace {

int do_run(RunConfig config, std::ostream& err) {
  config.validate();
  Dataset dataset = load_dataset(config.dataset_path);
  auto backend = make_backend(config.backend);

  TraceWriter writer(config.output_path, config.snapshot());
  std::size_t written = 0;
  std::size_t failed = 0;
  run_batch(dataset, *backend, config.chain, config.parallelism, [&](ChainTrace&& trace) {
    if (trace.failed()) {
      ++failed;
      err << "instance " << trace.instance_id << " failed: " << *trace.failure << '\n';
    }
    writer.write(trace);
    ++written;
  });
  writer.close();
  err << "wrote " << written << " traces to " << config.output_path.string() << '\n';
  if (failed > 0) {
    err << failed << " of " << written << " instances failed on the backend\n";
    return kBackend;
  }
  return kOk;
}

int do_eval(const fs::path& traces_path, const fs::path& data_path, const fs::path& out_path, std::ostream& err) {
  Dataset dataset = load_dataset(data_path);
  TraceFile file = read_traces(traces_path);
  EvalReport report = evaluate(file.traces, dataset);
  report.config = file.config;
  write_report(report, out_path);
  err << "macro-F1 all=" << report.macro_f1_all << " isa=" << report.macro_f1_isa << " (n_all="
      << report.counts.n_all << ", n_isa=" << report.counts.n_isa << ", unparseable=" << report.counts.n_unparseable
      << ", failed=" << report.counts.n_failed << ")\n";
  return kOk;
}

int do_export(const fs::path& traces_path, const fs::path& data_path, const fs::path& out_path, std::ostream& err) {
  Dataset dataset = load_dataset(data_path);
  TraceFile file = read_traces(traces_path);
  ExportResult result = export_finetune(file.traces, dataset);
  write_training_jsonl(result.records, out_path);
  err << "wrote " << result.records.size() << " training records to " << out_path.string();
  if (result.skipped_failed) err << " (skipped " << result.skipped_failed << " failed traces)";
  err << '\n';
  return kOk;
}

std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows,
                         const std::vector<std::string>& datasets) {
  std::size_t width = 4;
  for (const auto& [label, _] : rows) width = std::max(width, label.size());
  std::size_t dwidth = 7;
  for (const auto& d : datasets) dwidth = std::max(dwidth, d.size());

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "mode" << "  " << std::setw(static_cast<int>(dwidth))
      << "dataset" << std::right << std::setw(8) << "All" << std::setw(8) << "ISA" << std::setw(8) << "n_all"
      << std::setw(8) << "n_isa" << std::setw(8) << "unparse" << std::setw(8) << "failed" << '\n';
  out << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [label, r] = rows[i];
    out << std::left << std::setw(static_cast<int>(width)) << label << "  " << std::setw(static_cast<int>(dwidth))
        << datasets[i] << std::right << std::setw(8) << r.macro_f1_all * 100.0 << std::setw(8)
        << r.macro_f1_isa * 100.0 << std::setw(8) << r.counts.n_all << std::setw(8) << r.counts.n_isa
        << std::setw(8) << r.counts.n_unparseable << std::setw(8) << r.counts.n_failed << '\n';
  }
  return out.str();
}

int do_report(const std::vector<std::string>& report_paths, const std::optional<fs::path>& out_path,
              std::ostream& out) {
  std::vector<std::pair<std::string, EvalReport>> rows;
  std::vector<std::string> datasets;
  for (const auto& p : report_paths) {
    EvalReport r = read_report(p);
    rows.emplace_back(label_of(r, p), r);
    datasets.push_back(dataset_of(r));
  }
  std::string table = format_table(rows, datasets);
  if (out_path) {
    write_file(*out_path, table);
  } else {
    out << table;
  }
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Three-hop chain-of-thought sentiment reasoning over text-generation backends", "thor"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a dataset through a prompting mode and write traces");
  std::string config_file, data, out_path, mode, backend, mock_script, endpoint, model, api_key_env;
  double timeout_s = 0, rps = 0, temperature = 0;
  int max_retries = 0, max_in_flight = 0, samples = 0, min_cluster = 0, max_tokens = 0, parallelism = 0;
  std::int64_t seed = 0;
  auto* o_config = run->add_option("--config", config_file, "TOML run manifest; flags override it")->check(CLI::ExistingFile);
  auto* o_data = run->add_option("--data", data, "dataset JSONL");
  auto* o_out = run->add_option("--out", out_path, "trace JSONL to write");
  auto* o_mode = run->add_option("--mode", mode, "vanilla | zerocot | thor");
  auto* o_backend = run->add_option("--backend", backend, "mock | http");
  auto* o_mock = run->add_option("--mock-script", mock_script, "mock fixture JSONL");
  auto* o_endpoint = run->add_option("--endpoint", endpoint, "OpenAI-compatible completions URL");
  auto* o_model = run->add_option("--model", model, "model name sent to the endpoint");
  auto* o_key = run->add_option("--api-key-env", api_key_env, "environment variable holding the API key");
  auto* o_timeout = run->add_option("--timeout", timeout_s, "request timeout in seconds");
  auto* o_retries = run->add_option("--max-retries", max_retries, "re-attempts per request");
  auto* o_inflight = run->add_option("--max-in-flight", max_in_flight, "concurrent request bound");
  auto* o_rps = run->add_option("--rps", rps, "requests per second (0 = unlimited)");
  auto* o_samples = run->add_option("-k,--samples", samples, "generations per hop");
  auto* o_min = run->add_option("--min-cluster", min_cluster, "majority size needed to count as consistent");
  auto* o_temp = run->add_option("--temperature", temperature, "sampling temperature");
  auto* o_tokens = run->add_option("--max-tokens", max_tokens, "generation length cap");
  auto* o_par = run->add_option("-j,--parallelism", parallelism, "chains in flight");
  auto* o_seed = run->add_option("--seed", seed, "recorded in traces");

  // eval
  auto* eval = app.add_subcommand("eval", "score traces against a dataset");
  std::string eval_traces, eval_data, eval_out;
  eval->add_option("--traces", eval_traces, "trace JSONL")->required();
  eval->add_option("--data", eval_data, "dataset JSONL")->required();
  eval->add_option("--out", eval_out, "report JSON to write")->required();

  // export-finetune
  auto* exp = app.add_subcommand("export-finetune", "write revising-prompt training records from thor traces");
  std::string exp_traces, exp_data, exp_out;
  exp->add_option("--traces", exp_traces, "thor trace JSONL")->required();
  exp->add_option("--data", exp_data, "dataset JSONL")->required();
  exp->add_option("--out", exp_out, "training JSONL to write")->required();

  // report
  auto* rep = app.add_subcommand("report", "tabulate macro-F1 over All and ISA for several reports");
  std::vector<std::string> rep_inputs;
  std::string rep_out;
  rep->add_option("--reports", rep_inputs, "report JSON files, one row each")->required();
  auto* o_rep_out = rep->add_option("--out", rep_out, "write the table here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*run) {
      RunConfig config;
      if (*o_config) {
        config.config_path = config_file;
        apply_toml(config, read_file(config_file), config_file);
      }
      if (*o_data) config.dataset_path = data;
      if (*o_out) config.output_path = out_path;
      if (*o_mode) config.chain.mode = mode_from(mode);
      if (*o_backend) config.backend.kind = backend_from(backend);
      if (*o_mock) config.backend.mock_script = mock_script;
      if (*o_endpoint) config.backend.endpoint_url = endpoint;
      if (*o_model) config.backend.model_name = model;
      if (*o_key) config.backend.api_key_env = api_key_env;
      if (*o_timeout) config.backend.timeout = seconds_to_ms(timeout_s);
      if (*o_retries) config.backend.max_retries = max_retries;
      if (*o_inflight) config.backend.max_in_flight = max_in_flight;
      if (*o_rps) config.backend.requests_per_second = rps;
      if (*o_samples) {
        int keep = config.chain.voting.min_cluster;
        bool explicit_min = config.chain.voting != VotingConfig::with_samples(config.chain.voting.k);
        config.chain.voting = VotingConfig::with_samples(samples);
        if (explicit_min) config.chain.voting.min_cluster = keep;
      }
      if (*o_min) config.chain.voting.min_cluster = min_cluster;
      if (*o_temp) config.chain.decoding.temperature = temperature;
      if (*o_tokens) config.chain.decoding.max_tokens = max_tokens;
      if (*o_par) config.parallelism = parallelism;
      if (*o_seed) config.chain.decoding.seed = seed;
      return do_run(std::move(config), err);
    }
    if (*eval) return do_eval(eval_traces, eval_data, eval_out, err);
    if (*exp) return do_export(exp_traces, exp_data, exp_out, err);
    if (*rep) {
      std::optional<fs::path> target;
      if (*o_rep_out) target = rep_out;
      return do_report(rep_inputs, target, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace thor::cli
