// Command-line front end. Run() is the whole program minus process setup,
// so tests can drive it with in-memory streams.

#ifndef CAIT_CLI_H_
#define CAIT_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace cait::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name. "-" as a path means `in` / `out`.
int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace cait::cli

#endif  // CAIT_CLI_H_
