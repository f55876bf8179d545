#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcre::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kInvalidConfig = 2,
  kInvalidModel = 3,
  kPreconditionViolated = 4,
};

/// Runs one subcommand (analyze, simulate, erm, bound, verify, validate).
/// `args` excludes the program name. A JSON file passed with --config (or
/// --params) supplies defaults for any flag not given on the command line;
/// keys are flag names without the leading dashes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcre::cli
