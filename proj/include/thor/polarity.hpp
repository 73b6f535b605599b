#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace thor {

enum class Polarity { positive, neutral, negative };

inline constexpr std::array<Polarity, 3> kAllPolarities = {
    Polarity::positive, Polarity::neutral, Polarity::negative};

std::string_view to_string(Polarity p) noexcept;

/// Exact, case-sensitive parse of the three label words.
std::optional<Polarity> parse_polarity(std::string_view word) noexcept;

/// One labeled example: sentence X, target t, gold polarity y.
struct Instance {
  std::string id;
  std::string sentence;
  std::string target;
  Polarity gold = Polarity::neutral;
  bool implicit = false;

  bool operator==(const Instance&) const = default;
};

}  // namespace thor
