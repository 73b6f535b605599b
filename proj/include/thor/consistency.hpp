#pragma once

// Self-consistency voting over the candidates sampled at one hop.
//
// Candidates are partitioned by a normalized key. Clusters are ranked by
// size, then score mass, then first-seen index, with the unparseable cluster
// always last. The winner is the highest-score member of the top cluster.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thor/candidate.hpp"

namespace thor {

inline constexpr std::string_view kUnparseableKey = "\xE2\x8A\xA5";  // "⊥"

struct VotingConfig {
  int k = 5;
  int min_cluster = 3;

  /// min_cluster defaults to ceil(k / 2).
  static VotingConfig with_samples(int k);

  /// Throws Config unless 1 <= min_cluster <= k.
  void validate() const;

  bool operator==(const VotingConfig&) const = default;
};

struct CandidateCluster {
  std::string key;
  std::vector<Candidate> members;
  std::vector<std::size_t> indices;  // positions in the original candidate list
  double mass = 0.0;

  std::size_t size() const noexcept { return members.size(); }
  bool unparseable() const noexcept { return key == kUnparseableKey; }
};

struct Selection {
  Candidate candidate;
  std::size_t index = 0;  // position in the original candidate list
  bool consistent = false;
};

using KeyFunction = std::function<std::string(std::string_view)>;

/// Key for free-text hops: normalized text, or "⊥" when nothing survives.
std::string text_key(std::string_view answer);

/// Key for the polarity hop: the extracted label, or "⊥".
std::string polarity_key(std::string_view answer);

std::vector<CandidateCluster> cluster_candidates(std::span<const Candidate> candidates,
                                                 const KeyFunction& key_of);

/// Throws EmptyInput on no clusters, and AllUnparseable when `polarity_hop`
/// is set and the top cluster is "⊥" (which can only happen when it is the
/// sole cluster).
Selection select_answer(std::span<const CandidateCluster> clusters, const VotingConfig& config,
                        bool polarity_hop = false);

}  // namespace thor
