#include "thor/evaluate.hpp"

#include <unordered_map>

#include "thor/error.hpp"

namespace thor {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : cells_) {
    for (std::size_t c : row) n += c;
  }
  return n;
}

ClassScores class_scores(const ConfusionMatrix& m, Polarity cls) {
  std::size_t tp = m.at(cls, cls);
  std::size_t predicted = 0;
  std::size_t actual = 0;
  for (Polarity other : kAllPolarities) {
    predicted += m.at(other, cls);
    actual += m.at(cls, other);
  }
  ClassScores s;
  s.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  s.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
  double denom = s.precision + s.recall;
  s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

double macro_f1(const ConfusionMatrix& m) {
  double sum = 0.0;
  for (Polarity p : kAllPolarities) sum += class_scores(m, p).f1;
  return sum / static_cast<double>(kAllPolarities.size());
}

double micro_f1(const ConfusionMatrix& m) {
  std::size_t total = m.total();
  if (total == 0) return 0.0;
  std::size_t correct = 0;
  for (Polarity p : kAllPolarities) correct += m.at(p, p);
  return static_cast<double>(correct) / static_cast<double>(total);
}

EvalReport evaluate(std::span<const ChainTrace> traces, const Dataset& dataset) {
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto& inst : dataset.instances) by_id.emplace(inst.id, &inst);

  std::unordered_map<std::string, const ChainTrace*> seen;
  ConfusionMatrix all;
  ConfusionMatrix isa;
  EvalReport report;
  for (const auto& trace : traces) {
    auto it = by_id.find(trace.instance_id);
    if (it == by_id.end()) throw Error(Errc::UnknownId, "trace for unknown instance " + trace.instance_id);
    if (!seen.emplace(trace.instance_id, &trace).second) {
      throw Error(Errc::DuplicateId, "two traces for instance " + trace.instance_id);
    }
    if (trace.failed() || !trace.prediction) {
      ++report.counts.n_failed;
      continue;
    }
    const Instance& inst = *it->second;
    all.add(inst.gold, *trace.prediction);
    ++report.counts.n_all;
    if (inst.implicit) {
      isa.add(inst.gold, *trace.prediction);
      ++report.counts.n_isa;
    }
    if (trace.flags.contains(TraceFlag::unparseable)) ++report.counts.n_unparseable;
  }
  report.counts.n_failed += dataset.instances.size() - seen.size();

  for (Polarity p : kAllPolarities) {
    report.per_class[p] = class_scores(all, p);
    report.per_class_isa[p] = class_scores(isa, p);
  }
  report.macro_f1_all = macro_f1(all);
  report.macro_f1_isa = macro_f1(isa);
  report.micro_f1_all = micro_f1(all);
  report.micro_f1_isa = micro_f1(isa);
  return report;
}

namespace {

using json = nlohmann::ordered_json;
using nlohmann::ordered_json;

ordered_json scores_to_json(const std::map<Polarity, ClassScores>& scores) {
  ordered_json j;
  for (Polarity p : kAllPolarities) {
    const ClassScores& s = scores.at(p);
    j[std::string(to_string(p))] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  return j;
}

const json& need(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(Errc::SchemaMismatch, std::string("report is missing \"") + name + "\"");
  }
  return j[name];
}

double unit_real(const json& j, const char* name) {
  const json& v = need(j, name);
  if (!v.is_number()) throw Error(Errc::SchemaMismatch, std::string("\"") + name + "\" must be a number");
  double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) throw Error(Errc::SchemaMismatch, std::string("\"") + name + "\" outside [0,1]");
  return x;
}

std::size_t count(const json& j, const char* name) {
  const json& v = need(j, name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw Error(Errc::SchemaMismatch, std::string("\"") + name + "\" must be a count");
  }
  return v.get<std::size_t>();
}

std::map<Polarity, ClassScores> scores_from_json(const json& j) {
  std::map<Polarity, ClassScores> out;
  for (Polarity p : kAllPolarities) {
    const json& s = need(j, std::string(to_string(p)).c_str());
    out[p] = ClassScores{unit_real(s, "precision"), unit_real(s, "recall"), unit_real(s, "f1")};
  }
  return out;
}

}  // namespace

ordered_json report_to_json(const EvalReport& report) {
  ordered_json j;
  j["per_class"] = scores_to_json(report.per_class);
  j["per_class_isa"] = scores_to_json(report.per_class_isa);
  j["macro_f1_all"] = report.macro_f1_all;
  j["macro_f1_isa"] = report.macro_f1_isa;
  j["micro_f1_all"] = report.micro_f1_all;
  j["micro_f1_isa"] = report.micro_f1_isa;
  j["counts"] = {{"n_all", report.counts.n_all},
                 {"n_isa", report.counts.n_isa},
                 {"n_unparseable", report.counts.n_unparseable},
                 {"n_failed", report.counts.n_failed}};
  j["config"] = report.config;
  return j;
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.per_class = scores_from_json(need(j, "per_class"));
  r.per_class_isa = scores_from_json(need(j, "per_class_isa"));
  r.macro_f1_all = unit_real(j, "macro_f1_all");
  r.macro_f1_isa = unit_real(j, "macro_f1_isa");
  r.micro_f1_all = unit_real(j, "micro_f1_all");
  r.micro_f1_isa = unit_real(j, "micro_f1_isa");
  const json& c = need(j, "counts");
  r.counts = EvalCounts{count(c, "n_all"), count(c, "n_isa"), count(c, "n_unparseable"), count(c, "n_failed")};
  if (r.counts.n_isa > r.counts.n_all) throw Error(Errc::SchemaMismatch, "n_isa exceeds n_all");
  if (j.contains("config")) r.config = j["config"];
  return r;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  write_file(path, report_to_json(report).dump(2) + '\n');
}

EvalReport read_report(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaMismatch, path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace thor
