#pragma once

// Command-line front end. run_cli is the whole program minus process exit so
// tests can drive it in-process.

#include "nhssh/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nhssh {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3, kExitIo = 4 };

/// Directory searched for `--preset <name>`: $NHSSH_PRESET_DIR, else the
/// presets/ directory of the source tree.
[[nodiscard]] std::filesystem::path preset_directory();

[[nodiscard]] int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Executes one resolved configuration, writing into `dir`. Returns the
/// configuration as actually run (auto fields filled in).
ExperimentConfig run_command(ExperimentConfig config, const std::filesystem::path& dir);

}  // namespace nhssh
