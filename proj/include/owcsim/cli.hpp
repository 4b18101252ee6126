#pragma once

#include <string>
#include <vector>

namespace owcsim {

inline constexpr char kToolVersion[] = "0.1.0";

/// Full command-line entry point (subcommands gen-data, train, eval).
/// Returns the process exit code: 0 success, 2 usage, 3 config, 4 I/O,
/// 5 missing artifact, 1 internal error. Never throws.
int run_cli(int argc, const char* const* argv);

/// Convenience overload for in-process invocation; args exclude the program
/// name.
int run_cli(const std::vector<std::string>& args);

}  // namespace owcsim
