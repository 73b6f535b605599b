#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "thor/polarity.hpp"

namespace thor {

/// Byte span into the original (unnormalized) answer.
struct Span {
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const Span&) const = default;
};

struct ExtractionResult {
  std::optional<Polarity> polarity;
  std::optional<Span> matched_span;

  bool parseable() const noexcept { return polarity.has_value(); }
  bool operator==(const ExtractionResult&) const = default;
};

/// ASCII lowercase, ASCII punctuation to spaces, whitespace runs collapsed,
/// trimmed. Non-ASCII bytes pass through untouched.
std::string normalize_text(std::string_view s);

/// Last whole-word occurrence of positive/negative/neutral wins.
ExtractionResult extract_polarity(std::string_view answer);

}  // namespace thor
