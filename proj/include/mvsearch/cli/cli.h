#ifndef MVSEARCH_CLI_CLI_H_
#define MVSEARCH_CLI_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace mvsearch::cli {

inline constexpr const char* kToolVersion = "mvsearch 0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kContract = 4,
  kFormat = 5,
  kDivergence = 6,
  kBadInput = 7,  // unreadable source code or an empty ingest
};

// Runs one invocation. `args` excludes the program name. Errors are
// reported on `err` as a single JSON line and mapped to an exit code.
int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace mvsearch::cli

#endif  // MVSEARCH_CLI_CLI_H_
