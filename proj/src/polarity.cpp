#include "thor/polarity.hpp"

#include "thor/error.hpp"

namespace thor {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyField: return "EmptyField";
    case Errc::BadStep: return "BadStep";
    case Errc::PreconditionViolation: return "PreconditionViolation";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::AllUnparseable: return "AllUnparseable";
    case Errc::Transport: return "Transport";
    case Errc::RateLimited: return "RateLimited";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::AuthMissing: return "AuthMissing";
    case Errc::BadFixture: return "BadFixture";
    case Errc::ScriptExhausted: return "ScriptExhausted";
    case Errc::BadRecord: return "BadRecord";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnknownId: return "UnknownId";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::ModeMismatch: return "ModeMismatch";
    case Errc::Io: return "Io";
    case Errc::Config: return "Config";
  }
  return "Unknown";
}

std::string_view to_string(Polarity p) noexcept {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::neutral: return "neutral";
    case Polarity::negative: return "negative";
  }
  return "neutral";
}

std::optional<Polarity> parse_polarity(std::string_view word) noexcept {
  for (Polarity p : kAllPolarities) {
    if (word == to_string(p)) return p;
  }
  return std::nullopt;
}

}  // namespace thor
