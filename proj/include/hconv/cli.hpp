#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hconv::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
// A refutation, a witness, or a check that did not pass.
inline constexpr int kExitRefuted = 2;

/// Runs `hconv <command> ...`. `args` excludes the program name. The report
/// goes to `out`, usage and error messages to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace hconv::cli
