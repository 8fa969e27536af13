#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phswing::cli {

// Exit codes: 0 success, 1 validation error, 2 numerical failure.
// Errors are written to `err` as "E:<CODE>: message".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Help text of the top-level command followed by every subcommand.
std::string full_help();

// Every long flag registered on any subcommand, e.g. "--config".
std::vector<std::string> registered_flags();

}  // namespace phswing::cli
