#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nvsense::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Parse and run one command line (args exclude the program name).
/// Diagnostics go to `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nvsense::cli
