#include "thor/extraction.hpp"

namespace thor {
namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

bool is_separator(unsigned char c) { return is_ascii_space(c) || is_ascii_punct(c); }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool equals_lowered(std::string_view token, std::string_view word) {
  if (token.size() != word.size()) return false;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (ascii_lower(token[i]) != word[i]) return false;
  }
  return true;
}

}  // namespace

std::string normalize_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (is_separator(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += ascii_lower(ch);
  }
  return out;
}

ExtractionResult extract_polarity(std::string_view answer) {
  // Tokens here are exactly the words normalize_text would produce, located
  // in the original string so the span points at the caller's text.
  ExtractionResult result;
  std::size_t i = 0;
  while (i < answer.size()) {
    while (i < answer.size() && is_separator(static_cast<unsigned char>(answer[i]))) ++i;
    std::size_t begin = i;
    while (i < answer.size() && !is_separator(static_cast<unsigned char>(answer[i]))) ++i;
    if (begin == i) break;
    std::string_view token = answer.substr(begin, i - begin);
    for (Polarity p : kAllPolarities) {
      if (equals_lowered(token, to_string(p))) {
        result.polarity = p;
        result.matched_span = Span{begin, i - begin};
      }
    }
  }
  return result;
}

}  // namespace thor
