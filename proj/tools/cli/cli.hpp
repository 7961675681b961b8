#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ecotherm::cli {

// Exit codes of run_command.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;         // bad flags, model or I/O
inline constexpr int exit_check_failed = 2;  // verify found a failing check

// Runs one subcommand. args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecotherm::cli
