#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "thor/chain.hpp"
#include "thor/dataset.hpp"

namespace thor {

/// One supervised reasoning-revising example:
///   {"input", "target_label", "instance_id", "step"}
struct TrainingRecord {
  std::string input;
  Polarity target_label = Polarity::neutral;
  std::string instance_id;
  int step = 1;

  bool operator==(const TrainingRecord&) const = default;
};

struct ExportResult {
  std::vector<TrainingRecord> records;
  std::size_t skipped_failed = 0;
};

/// Three records per completed thor trace: the revising prompts after hops 1
/// and 2, then the hop-3 prompt as is. All are labeled with the gold
/// polarity. Throws ModeMismatch for non-thor traces, UnknownId for traces
/// outside the dataset, and SchemaMismatch when a trace's contexts do not
/// rebuild from its own answers. Failed traces are skipped and counted.
ExportResult export_finetune(std::span<const ChainTrace> traces, const Dataset& dataset);

std::string format_training_jsonl(std::span<const TrainingRecord> records);
void write_training_jsonl(std::span<const TrainingRecord> records, const std::filesystem::path& path);

}  // namespace thor
