#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gwlimit::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 1,
    kNotConverged = 2,
};

/// Runs one CLI invocation. `args` excludes the program name. Exit codes:
/// 0 success, 1 usage or input error, 2 numerical failure (solver
/// non-convergence still writes its artifacts).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gwlimit::cli
