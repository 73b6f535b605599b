#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>

#include <json.hpp>

#include "thor/chain.hpp"
#include "thor/dataset.hpp"

namespace thor {

/// 3x3 confusion counts, rows = gold, columns = prediction, both indexed in
/// kAllPolarities order.
class ConfusionMatrix {
 public:
  void add(Polarity gold, Polarity predicted) { ++cells_[index(gold)][index(predicted)]; }
  std::size_t at(Polarity gold, Polarity predicted) const { return cells_[index(gold)][index(predicted)]; }
  std::size_t total() const;

  static std::size_t index(Polarity p) { return static_cast<std::size_t>(p); }

 private:
  std::array<std::array<std::size_t, 3>, 3> cells_{};
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const ClassScores&) const = default;
};

/// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); any 0/0 is taken as 0.
ClassScores class_scores(const ConfusionMatrix& m, Polarity cls);

/// Unweighted mean of the three per-class F1 values.
double macro_f1(const ConfusionMatrix& m);

/// Micro-averaged F1; equals accuracy for single-label data. 0 when empty.
double micro_f1(const ConfusionMatrix& m);

struct EvalCounts {
  std::size_t n_all = 0;          // evaluable instances
  std::size_t n_isa = 0;          // evaluable implicit instances
  std::size_t n_unparseable = 0;  // evaluable traces that fell back to neutral
  std::size_t n_failed = 0;       // failed or missing traces

  bool operator==(const EvalCounts&) const = default;
};

struct EvalReport {
  std::map<Polarity, ClassScores> per_class;      // over All
  std::map<Polarity, ClassScores> per_class_isa;  // over the implicit subset
  double macro_f1_all = 0.0;
  double macro_f1_isa = 0.0;
  double micro_f1_all = 0.0;
  double micro_f1_isa = 0.0;
  EvalCounts counts;
  nlohmann::ordered_json config;  // echo of the run that produced the traces

  bool operator==(const EvalReport&) const = default;
};

/// Failed traces and dataset instances without a trace count as n_failed and
/// stay out of every denominator. Throws UnknownId for traces naming no
/// instance and DuplicateId for two traces of one instance.
EvalReport evaluate(std::span<const ChainTrace> traces, const Dataset& dataset);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::ordered_json& j);

void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

}  // namespace thor
