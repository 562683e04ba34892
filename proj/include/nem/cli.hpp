#pragma once

#include <ostream>

#include "nem/config.hpp"

namespace nem {

/// Process exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitConfigError = 1, kExitRuntimeError = 2 };

/// Entry point of the `nem_bench` tool. Subcommands: run, sweep, compare,
/// diag. Results go to `out`, usage and errors to `err`.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                       const EnvLookup& env = process_environment());

}  // namespace nem
