#include "thor/chain.hpp"

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "thor/dataset.hpp"
#include "thor/error.hpp"
#include "thor/extraction.hpp"

namespace thor {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::vanilla: return "vanilla";
    case Mode::zerocot: return "zerocot";
    case Mode::thor: return "thor";
  }
  return "thor";
}

std::optional<Mode> parse_mode(std::string_view name) noexcept {
  for (Mode m : {Mode::vanilla, Mode::zerocot, Mode::thor}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

std::string_view to_string(TraceFlag flag) noexcept {
  return flag == TraceFlag::unparseable ? "unparseable" : "low_consistency";
}

std::optional<TraceFlag> parse_trace_flag(std::string_view name) noexcept {
  if (name == "unparseable") return TraceFlag::unparseable;
  if (name == "low_consistency") return TraceFlag::low_consistency;
  return std::nullopt;
}

namespace {

std::vector<Candidate> sample(Backend& backend, const ChainConfig& config, const Instance& instance,
                              int tag_step, const PromptText& prompt) {
  GenerationRequest request;
  request.prompt = prompt;
  request.n = config.voting.k;
  request.temperature = config.decoding.temperature;
  request.max_tokens = config.decoding.max_tokens;
  request.seed = config.decoding.seed;
  request.tag = RequestTag{instance.id, tag_step};
  return backend.generate(request);
}

HopRecord free_text_hop(Backend& backend, const ChainConfig& config, const Instance& instance,
                        int step, std::pair<PromptText, HopContext> built) {
  HopRecord hop;
  hop.step = step;
  hop.prompt = std::move(built.first);
  hop.candidates = sample(backend, config, instance, step, hop.prompt);
  auto clusters = cluster_candidates(hop.candidates, text_key);
  Selection sel = select_answer(clusters, config.voting);
  hop.selected = sel.candidate;
  hop.selected_index = sel.index;
  hop.consistency_flag = sel.consistent;
  hop.context_after = extend_context(built.second, hop.selected.text);
  return hop;
}

// Final hop: votes over extracted labels; the winning cluster's label is the
// prediction. With no label anywhere the prediction falls back to neutral.
HopRecord polarity_hop(Backend& backend, const ChainConfig& config, const Instance& instance,
                       int tag_step, PromptText prompt, HopContext context, ChainTrace& trace) {
  HopRecord hop;
  hop.step = context.step;
  hop.prompt = std::move(prompt);
  hop.candidates = sample(backend, config, instance, tag_step, hop.prompt);
  auto clusters = cluster_candidates(hop.candidates, polarity_key);
  Selection sel;
  try {
    sel = select_answer(clusters, config.voting, /*polarity_hop=*/true);
    trace.prediction = parse_polarity(clusters.front().key);
  } catch (const Error& e) {
    if (e.code() != Errc::AllUnparseable) throw;
    sel = select_answer(clusters, config.voting);
    trace.prediction = Polarity::neutral;
    trace.flags.insert(TraceFlag::unparseable);
  }
  hop.selected = sel.candidate;
  hop.selected_index = sel.index;
  hop.consistency_flag = sel.consistent;
  hop.context_after = extend_context(context, hop.selected.text);
  return hop;
}

void run_into(const Instance& instance, Backend& backend, const ChainConfig& config, ChainTrace& trace) {
  trace.instance_id = instance.id;
  trace.mode = config.mode;
  trace.config = config;

  if (instance.sentence.find(instance.target) == std::string::npos) {
    std::clog << "warning: target \"" << instance.target << "\" of " << instance.id
              << " does not occur in its sentence\n";
  }

  if (config.mode == Mode::thor) {
    trace.hops.push_back(free_text_hop(backend, config, instance, 1,
                                       build_hop_prompt(1, instance.sentence, instance.target)));
    trace.hops.push_back(free_text_hop(backend, config, instance, 2,
                                       build_hop_prompt(2, trace.hops[0].context_after, instance.target)));
    auto [prompt, context] = build_hop_prompt(3, trace.hops[1].context_after, instance.target);
    trace.hops.push_back(
        polarity_hop(backend, config, instance, 3, std::move(prompt), std::move(context), trace));
  } else {
    PromptText prompt = config.mode == Mode::vanilla
                            ? build_vanilla_prompt(instance.sentence, instance.target)
                            : build_zerocot_prompt(instance.sentence, instance.target);
    HopContext context{1, prompt.text};
    trace.hops.push_back(
        polarity_hop(backend, config, instance, 0, std::move(prompt), std::move(context), trace));
  }

  if (std::any_of(trace.hops.begin(), trace.hops.end(),
                  [](const HopRecord& h) { return !h.consistency_flag; })) {
    trace.flags.insert(TraceFlag::low_consistency);
  }
}

ChainTrace run_or_record_failure(const Instance& instance, Backend& backend, const ChainConfig& config) {
  ChainTrace trace;
  try {
    run_into(instance, backend, config, trace);
  } catch (const Error& e) {
    if (!is_backend_failure(e.code())) throw;
    trace.prediction.reset();
    trace.flags.clear();
    trace.failure = e.what();
  }
  return trace;
}

}  // namespace

ChainTrace run_chain(const Instance& instance, Backend& backend, const ChainConfig& config) {
  config.voting.validate();
  ChainTrace trace;
  run_into(instance, backend, config, trace);
  return trace;
}

void run_batch(const Dataset& dataset, Backend& backend, const ChainConfig& config, int parallelism,
               const TraceSink& sink) {
  config.voting.validate();
  if (parallelism < 1 || parallelism > backend.max_in_flight()) {
    throw Error(Errc::Config, "parallelism must lie in [1, " + std::to_string(backend.max_in_flight()) +
                                  "], got " + std::to_string(parallelism));
  }
  const auto& instances = dataset.instances;
  const std::size_t total = instances.size();
  if (total == 0) return;

  std::mutex mutex;
  std::condition_variable ready;
  std::vector<std::optional<ChainTrace>> done(total);
  std::size_t next_job = 0;
  std::exception_ptr fatal;

  auto worker = [&] {
    for (;;) {
      std::size_t job;
      {
        std::lock_guard lock(mutex);
        if (fatal || next_job == total) return;
        job = next_job++;
      }
      try {
        ChainTrace trace = run_or_record_failure(instances[job], backend, config);
        std::lock_guard lock(mutex);
        done[job] = std::move(trace);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!fatal) fatal = std::current_exception();
      }
      ready.notify_all();
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), total);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);

  // Order-restoring drain: emit trace i only once traces 0..i-1 are out.
  std::size_t emitted = 0;
  while (emitted < total) {
    std::optional<ChainTrace> trace;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return fatal || done[emitted].has_value(); });
      if (fatal) break;
      trace = std::move(done[emitted]);
      done[emitted].reset();
    }
    try {
      sink(std::move(*trace));
    } catch (...) {
      std::lock_guard lock(mutex);
      fatal = std::current_exception();
      break;
    }
    ++emitted;
  }
  pool.clear();
  if (fatal) std::rethrow_exception(fatal);
}

std::vector<ChainTrace> run_batch(const Dataset& dataset, Backend& backend, const ChainConfig& config,
                                  int parallelism) {
  std::vector<ChainTrace> out;
  out.reserve(dataset.instances.size());
  run_batch(dataset, backend, config, parallelism, [&](ChainTrace&& t) { out.push_back(std::move(t)); });
  return out;
}

}  // namespace thor
