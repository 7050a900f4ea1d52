#pragma once

#include <ostream>

namespace radialdlt::cli {

/// Exit codes: 0 success, 1 metric-threshold failure, 2 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMetricFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command-line tool with the given arguments; `out` receives
/// results and `err` diagnostics.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace radialdlt::cli
