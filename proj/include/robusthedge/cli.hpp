#pragma once

#include <string>
#include <vector>

namespace robusthedge {

inline constexpr int exit_ok = 0;
inline constexpr int exit_verification_failure = 1;
inline constexpr int exit_usage = 2;

/// Entry point of the robusthedge command line. Subcommands: price,
/// verify-duality, verify-decomposition, concavify, calc-derivatives.
int run_cli(int argc, const char* const* argv);

/// Same, with the arguments after the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace robusthedge
