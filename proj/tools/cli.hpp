#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace orcsf::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Stable exit codes.
enum ExitCode : int { kSuccess = 0, kFailure = 1, kUsage = 2 };

/// Entry point shared by the executable and the tests. args[0] is the
/// program name. Output files go under --out, defaulting to
/// $ORCSF_OUTPUT_DIR or ./orcsf-out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace orcsf::cli
