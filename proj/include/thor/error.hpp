#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thor {

enum class Errc {
  EmptyField,
  BadStep,
  PreconditionViolation,
  EmptyInput,
  AllUnparseable,
  // backend
  Transport,
  RateLimited,
  MalformedResponse,
  AuthMissing,
  BadFixture,
  ScriptExhausted,
  // data
  BadRecord,
  DuplicateId,
  UnknownId,
  SchemaMismatch,
  ModeMismatch,
  Io,
  Config,
};

std::string_view errc_name(Errc code) noexcept;

/// True for the errors a text-generation endpoint can raise at call time.
/// Chain runs record these as failed traces instead of aborting a batch.
constexpr bool is_backend_failure(Errc code) noexcept {
  return code == Errc::Transport || code == Errc::RateLimited ||
         code == Errc::MalformedResponse || code == Errc::AuthMissing;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace thor
