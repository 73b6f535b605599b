#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thor/backend.hpp"
#include "thor/chain.hpp"

namespace thor::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kBackend = 4,
};

/// Resolved settings for the `run` subcommand: TOML file first, flags on top.
struct RunConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path output_path;
  std::optional<std::filesystem::path> config_path;
  ChainConfig chain;
  BackendConfig backend;
  int parallelism = 1;

  /// Throws Config on missing or colliding paths and invalid settings.
  void validate() const;

  /// Echoed into the trace header. Leaves out the output path and the
  /// parallelism, neither of which changes the traces.
  nlohmann::ordered_json snapshot() const;
};

/// Applies a TOML document onto `config`. Throws Config on bad types,
/// unknown keys, or a parse failure.
void apply_toml(RunConfig& config, std::string_view toml_text, const std::string& source = "config");

/// Runs the command line. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace thor::cli
