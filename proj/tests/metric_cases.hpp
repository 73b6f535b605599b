#pragma once

// Hand-computed confusion matrices. Labels are spelled one character per
// instance: p = positive, n = negative, u = neutral. Expected values were
// worked out by hand as fractions.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thor/chain.hpp"
#include "thor/dataset.hpp"
#include "thor/evaluate.hpp"

namespace thor::testing {

struct MetricCase {
  std::string gold;
  std::string pred;
  std::array<double, 3> f1;  // positive, negative, neutral
  double macro;
  double micro;
};

inline const std::vector<MetricCase>& metric_cases() {
  static const std::vector<MetricCase> cases = {
      {"ppnu", "pnnu", {2.0 / 3, 2.0 / 3, 1.0}, 7.0 / 9, 3.0 / 4},
      {"pnu", "pnu", {1.0, 1.0, 1.0}, 1.0, 1.0},
      {"pnu", "nup", {0.0, 0.0, 0.0}, 0.0, 0.0},
      {"pppp", "pppp", {1.0, 0.0, 0.0}, 1.0 / 3, 1.0},
      {"pppp", "ppuu", {2.0 / 3, 0.0, 0.0}, 2.0 / 9, 1.0 / 2},
      {"pnun", "uuuu", {0.0, 0.0, 2.0 / 5}, 2.0 / 15, 1.0 / 4},
      {"ppppppppnnnnnnuuuuuu", "ppppppnupppnnnpppuuu", {0.6, 0.6, 0.6}, 0.6, 0.6},
      {"ppnnuu", "pnnuup", {0.5, 0.5, 0.5}, 0.5, 0.5},
      {"pppnu", "ppnnn", {4.0 / 5, 1.0 / 2, 0.0}, 13.0 / 30, 3.0 / 5},
      {"pnnnuu", "pppnuu", {0.5, 0.5, 1.0}, 2.0 / 3, 2.0 / 3},
      {"u", "p", {0.0, 0.0, 0.0}, 0.0, 0.0},
      {"", "", {0.0, 0.0, 0.0}, 0.0, 0.0},
      {"ppppppn", "pppppnn", {10.0 / 11, 2.0 / 3, 0.0}, 52.0 / 99, 6.0 / 7},
  };
  return cases;
}

inline Polarity label(char c) {
  return c == 'p' ? Polarity::positive : c == 'n' ? Polarity::negative : Polarity::neutral;
}

/// Dataset plus single-hop traces carrying the given predictions. Instances
/// whose index is listed in `implicit` are marked implicit.
struct Labeled {
  Dataset dataset;
  std::vector<ChainTrace> traces;
};

inline Labeled make_labeled(const std::string& gold, const std::string& pred,
                            const std::string& implicit_mask = {}) {
  Labeled out;
  out.dataset.name = "fixture";
  for (std::size_t i = 0; i < gold.size(); ++i) {
    Instance inst;
    inst.id = "i" + std::to_string(i);
    inst.sentence = "Sentence number " + std::to_string(i) + " about the thing.";
    inst.target = "the thing";
    inst.gold = label(gold[i]);
    inst.implicit = i < implicit_mask.size() && implicit_mask[i] == '1';
    out.dataset.instances.push_back(inst);

    ChainTrace t;
    t.instance_id = inst.id;
    t.mode = Mode::vanilla;
    t.prediction = label(pred[i]);
    out.traces.push_back(t);
  }
  return out;
}

/// Returns a description of the first mismatch beyond `tol`, if any.
inline std::optional<std::string> check_metric_case(const MetricCase& c, double tol = 1e-9) {
  Labeled l = make_labeled(c.gold, c.pred);
  EvalReport r = evaluate(l.traces, l.dataset);
  auto off = [&](double got, double want) { return !(std::fabs(got - want) <= tol); };
  std::string where = "gold=" + c.gold + " pred=" + c.pred + ": ";
  constexpr std::array<Polarity, 3> order = {Polarity::positive, Polarity::negative, Polarity::neutral};
  for (std::size_t k = 0; k < 3; ++k) {
    double got = r.per_class.at(order[k]).f1;
    if (off(got, c.f1[k])) {
      return where + std::string(to_string(order[k])) + " f1 " + std::to_string(got) + " want " +
             std::to_string(c.f1[k]);
    }
  }
  if (off(r.macro_f1_all, c.macro)) return where + "macro " + std::to_string(r.macro_f1_all);
  if (off(r.micro_f1_all, c.micro)) return where + "micro " + std::to_string(r.micro_f1_all);
  if (r.counts.n_all != c.gold.size()) return where + "n_all";
  return std::nullopt;
}

}  // namespace thor::testing
