#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace condor::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kDivergence = 3,
    kValidationError = 4,
};

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "CONDOR_OUTPUT_ROOT";

/// Runs the `condor` command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace condor::cli
