#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace telsim::cli {

inline constexpr const char* kToolVersion = "0.3.0";

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "TELSIM_OUTPUT_DIR";

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kInput = 3,
    kInfeasible = 4,
};

/// Runs one `telsim` invocation. `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace telsim::cli
