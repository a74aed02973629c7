#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dsacd::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;  // bad flags or configuration
inline constexpr int kNumerical = 3;

/// Name of the variable that relocates relative output directories.
inline constexpr const char* kOutputRootVar = "DSACD_OUTPUT_ROOT";

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Prefixes relative paths with $DSACD_OUTPUT_ROOT when it is set.
std::string resolve_output_dir(const std::string& dir);

}  // namespace dsacd::cli
