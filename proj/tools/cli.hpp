#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qp::cli {

// full command-line driver; args exclude the program name.
// returns the process exit code: 0 success, 1 config, 2 i/o, 3 invariant violation.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace qp::cli
