#ifndef LCR_CLI_HPP_
#define LCR_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace lcr::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3 };

// Environment variable naming the default --out directory.
inline constexpr const char* kOutEnv = "LCR_OUT";

// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcr::cli

#endif  // LCR_CLI_HPP_
