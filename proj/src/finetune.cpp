#include "thor/finetune.hpp"

#include <unordered_map>

#include <json.hpp>

#include "thor/error.hpp"
#include "thor/prompt.hpp"

namespace thor {

ExportResult export_finetune(std::span<const ChainTrace> traces, const Dataset& dataset) {
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto& inst : dataset.instances) by_id.emplace(inst.id, &inst);

  ExportResult result;
  for (const auto& trace : traces) {
    if (trace.mode != Mode::thor) {
      throw Error(Errc::ModeMismatch, "trace " + trace.instance_id + " has mode " +
                                          std::string(to_string(trace.mode)) + ", export needs thor");
    }
    auto it = by_id.find(trace.instance_id);
    if (it == by_id.end()) throw Error(Errc::UnknownId, "trace for unknown instance " + trace.instance_id);
    if (trace.failed()) {
      ++result.skipped_failed;
      continue;
    }
    if (trace.hops.size() != 3) {
      throw Error(Errc::SchemaMismatch, "thor trace " + trace.instance_id + " has " +
                                            std::to_string(trace.hops.size()) + " hops");
    }
    const Instance& inst = *it->second;
    const std::string& aspect = trace.hops[0].selected.text;
    const std::string& opinion = trace.hops[1].selected.text;

    auto [p1, c1] = build_hop_prompt(1, inst.sentence, inst.target);
    auto [p2, c2] = build_hop_prompt(2, extend_context(c1, aspect), inst.target);
    auto [p3, c3] = build_hop_prompt(3, extend_context(c2, opinion), inst.target);
    if (p1 != trace.hops[0].prompt || p2 != trace.hops[1].prompt || p3 != trace.hops[2].prompt) {
      throw Error(Errc::SchemaMismatch,
                  "trace " + trace.instance_id + " prompts do not rebuild from its selected answers");
    }

    result.records.push_back({assemble_revising_prompt(1, c1, aspect, inst.target).text, inst.gold, inst.id, 1});
    result.records.push_back({assemble_revising_prompt(2, c2, opinion, inst.target).text, inst.gold, inst.id, 2});
    result.records.push_back({p3.text, inst.gold, inst.id, 3});
  }
  return result;
}

std::string format_training_jsonl(std::span<const TrainingRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["input"] = r.input;
    j["target_label"] = to_string(r.target_label);
    j["instance_id"] = r.instance_id;
    j["step"] = r.step;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_training_jsonl(std::span<const TrainingRecord> records, const std::filesystem::path& path) {
  write_file(path, format_training_jsonl(records));
}

}  // namespace thor
