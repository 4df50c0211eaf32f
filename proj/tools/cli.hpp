#pragma once

#include <iosfwd>

#include "run_config.hpp"

namespace flowsynth::cli {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConsistency = 3;

/// Parses argv, resolves the effective RunConfig and runs the subcommand.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

/// Runs an already resolved configuration. Failures are reported on `err`
/// as a one-line JSON object and mapped onto the exit-code contract.
int execute(const RunConfig &config, std::ostream &out, std::ostream &err);

} // namespace flowsynth::cli
