#ifndef EXPRESSLANE_CLI_APP_HPP
#define EXPRESSLANE_CLI_APP_HPP

#include <ostream>
#include <string>
#include <vector>

namespace expresslane::cli {

enum ExitCode : int {
    kOk = 0,
    kIoError = 1,
    kValidationFailure = 2,
    kNotConverged = 3,
};

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace expresslane::cli

#endif
