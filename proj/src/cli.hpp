// Command-line front end. Subcommands: protect, bell, wstate, teleport,
// sweep, verify. Exit codes: 0 success, 1 validation error, 2 verification
// failure (verify only).

#pragma once

namespace qsim::app {

int run_cli(int argc, char** argv);

}  // namespace qsim::app
