#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace knnad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (args[0] is the program name). Diagnostics
/// go to `err`, informational output to `out`. Returns the process exit
/// code: 0 success, 2 usage or input error, 1 internal error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace knnad::cli
