#include "thor/consistency.hpp"

#include <algorithm>
#include <map>

#include "thor/error.hpp"
#include "thor/extraction.hpp"

namespace thor {

VotingConfig VotingConfig::with_samples(int k) { return VotingConfig{k, (k + 1) / 2}; }

void VotingConfig::validate() const {
  if (k < 1) throw Error(Errc::Config, "voting k must be >= 1, got " + std::to_string(k));
  if (min_cluster < 1 || min_cluster > k) {
    throw Error(Errc::Config, "min_cluster must lie in [1, k], got " + std::to_string(min_cluster) +
                                  " with k=" + std::to_string(k));
  }
}

std::string text_key(std::string_view answer) {
  std::string key = normalize_text(answer);
  if (key.empty()) return std::string(kUnparseableKey);
  return key;
}

std::string polarity_key(std::string_view answer) {
  auto extracted = extract_polarity(answer);
  if (!extracted.polarity) return std::string(kUnparseableKey);
  return std::string(to_string(*extracted.polarity));
}

std::vector<CandidateCluster> cluster_candidates(std::span<const Candidate> candidates,
                                                 const KeyFunction& key_of) {
  if (candidates.empty()) throw Error(Errc::EmptyInput, "no candidates to cluster");

  std::vector<CandidateCluster> clusters;
  std::map<std::string, std::size_t, std::less<>> slot;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::string key = key_of(candidates[i].text);
    auto [it, inserted] = slot.try_emplace(key, clusters.size());
    if (inserted) clusters.push_back(CandidateCluster{std::move(key), {}, {}, 0.0});
    CandidateCluster& cluster = clusters[it->second];
    cluster.members.push_back(candidates[i]);
    cluster.indices.push_back(i);
    cluster.mass += candidates[i].score;
  }

  // Clusters were created in first-seen order, so indices.front() is the
  // first-seen index and serves as the final tie-break.
  std::sort(clusters.begin(), clusters.end(), [](const CandidateCluster& a, const CandidateCluster& b) {
    if (a.unparseable() != b.unparseable()) return b.unparseable();
    if (a.size() != b.size()) return a.size() > b.size();
    if (a.mass != b.mass) return a.mass > b.mass;
    return a.indices.front() < b.indices.front();
  });
  return clusters;
}

Selection select_answer(std::span<const CandidateCluster> clusters, const VotingConfig& config,
                        bool polarity_hop) {
  if (clusters.empty()) throw Error(Errc::EmptyInput, "no clusters to select from");
  const CandidateCluster& top = clusters.front();
  if (top.members.empty()) throw Error(Errc::EmptyInput, "top cluster has no members");
  if (polarity_hop && top.unparseable()) {
    throw Error(Errc::AllUnparseable, "no candidate names a polarity");
  }

  std::size_t best = 0;
  for (std::size_t m = 1; m < top.members.size(); ++m) {
    const double s = top.members[m].score;
    const double b = top.members[best].score;
    if (s > b || (s == b && top.indices[m] < top.indices[best])) best = m;
  }
  Selection out;
  out.candidate = top.members[best];
  out.index = top.indices[best];
  out.consistent = static_cast<long long>(top.size()) >= config.min_cluster && !top.unparseable();
  return out;
}

}  // namespace thor
