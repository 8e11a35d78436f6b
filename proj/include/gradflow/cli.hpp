#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gradflow {

/// Exit codes: 0 success, 1 solver abort or failed verification, 2 bad
/// arguments or configuration.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the gradflow tool. args[0] is the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace gradflow
