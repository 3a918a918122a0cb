#pragma once

#include <string>
#include <vector>

namespace scomp::cli {

/// Entry point shared by the scomp binary and the test harness. args holds
/// everything after the program name. Returns 0 on success, 1 on usage
/// errors, 2 on data errors.
int run_command(std::vector<std::string> args);

}  // namespace scomp::cli
