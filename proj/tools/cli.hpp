#pragma once

#include <iosfwd>

namespace ranhpp::cli {

/// Exit status of a command.
///   0  success
///   1  domain, dimension or convergence failure
///   2  I/O or configuration failure (including bad flags)
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitIo = 2;

/// Environment variable naming a default key=value config file.
inline constexpr const char* kConfigEnv = "RANHPP_CONFIG";

/// Parses the command line and runs one subcommand. Results go to the output file
/// named by --output, or to `out` when none is given; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ranhpp::cli
