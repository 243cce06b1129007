#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace liveguard {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;  // config or usage errors
inline constexpr int kExitIo = 3;      // unreadable/unwritable/corrupt files
inline constexpr int kExitNumeric = 4; // numerical failures

/// Runs one CLI invocation (subcommand + flags, without the program name).
/// Returns the process exit code. All human-readable progress goes to err;
/// out carries only machine-readable CSV summaries.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace liveguard
