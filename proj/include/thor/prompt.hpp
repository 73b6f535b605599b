#pragma once

// Prompt construction for the vanilla, zero-shot CoT and three-hop modes.
//
// Every function here is pure: identical inputs give byte-identical
// strings. The three-hop chain threads a HopContext through the hops:
//
//   C1 = Given the sentence "X"
//   C2 = C1 + " " + A       (A: selected hop-1 answer)
//   C3 = C2 + " " + O       (O: selected hop-2 answer)
//
// and each hop prompt is its context followed by a fixed question.

#include <string>
#include <string_view>
#include <utility>

namespace thor {

struct PromptText {
  std::string text;

  bool operator==(const PromptText&) const = default;
};

struct HopContext {
  int step = 1;
  std::string text;

  bool operator==(const HopContext&) const = default;
};

inline constexpr std::string_view kZeroCotSuffix = " Let's think step by step.";

PromptText build_vanilla_prompt(std::string_view sentence, std::string_view target);
PromptText build_zerocot_prompt(std::string_view sentence, std::string_view target);

/// Hop 1: `sentence` is the raw sentence X. Throws BadStep for any other step.
std::pair<PromptText, HopContext> build_hop_prompt(int step, std::string_view sentence,
                                                   std::string_view target);

/// Hops 2 and 3: `previous` is the prior hop's context already extended with
/// that hop's selected answer, so previous.step must equal step - 1.
std::pair<PromptText, HopContext> build_hop_prompt(int step, const HopContext& previous,
                                                   std::string_view target);

/// Appends the answer after a single space. The step is left unchanged.
HopContext extend_context(const HopContext& context, std::string_view answer);

/// Training input for supervised revising at the end of hop 1 or 2:
/// `{context} {answer} What is the sentiment polarity towards {target}?`
PromptText assemble_revising_prompt(int step, const HopContext& context, std::string_view answer,
                                    std::string_view target);

}  // namespace thor
