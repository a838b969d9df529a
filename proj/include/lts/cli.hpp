#pragma once

#include <string>
#include <vector>

namespace lts {

// Runs one command-line invocation (arguments without the program name).
// Returns the process exit status: 0 success, 2 configuration error,
// 3 data error, 4 estimation error. Errors are reported as one-line JSON
// records on stderr.
int dispatch(const std::vector<std::string> &args);

} // namespace lts
