#pragma once

#include <string>
#include <vector>

namespace duphist {

// Exit codes: 0 success, 2 input error, 3 internal invariant violation.
constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_internal = 3;

// Entry point of the duphist command line (args exclude the program name).
int run_cli(const std::vector<std::string>& args);

// Applies DUPHIST_LOG (error, warn, info, debug; default warn).
void configure_logging();

}  // namespace duphist
