#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "thor/polarity.hpp"

namespace thor {

struct Dataset {
  std::string name;
  std::vector<Instance> instances;

  bool operator==(const Dataset&) const = default;
};

/// Reads the flat JSONL schema
///   {"id", "sentence", "target", "polarity", "implicit"}
/// preserving file order. Blank lines are skipped. Throws BadRecord with the
/// line number, DuplicateId, or Io. The dataset name is the file stem.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::string_view jsonl, std::string name = {});

std::string format_dataset(const Dataset& dataset);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Whole-file helpers shared by the readers and writers.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace thor
