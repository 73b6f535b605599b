#pragma once

#include <string>

namespace thor {

/// One sampled generation. `score` is the mean per-token log-probability when
/// the backend reports log-probabilities, otherwise 0.
struct Candidate {
  std::string text;
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

}  // namespace thor
