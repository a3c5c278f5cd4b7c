#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ratekit::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kNumericalError = 4,
};

// Runs one subcommand: simulate | train | importance | group-importance |
// evaluate | demo-collinearity. args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace ratekit::cli
