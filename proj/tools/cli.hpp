#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace requ_gap::cli {

/// Exit codes: 0 the checked assertion holds, 1 it fails, 2 bad input.
inline constexpr int kPass = 0;
inline constexpr int kFail = 1;
inline constexpr int kUsage = 2;

/// Runs one command. `args` excludes the program name. The JSON envelope
/// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace requ_gap::cli
