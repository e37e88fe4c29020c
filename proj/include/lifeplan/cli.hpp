#pragma once

namespace lifeplan {

// Parses argv and runs one subcommand. Exit codes: 0 success, 1 runtime
// failure (solver/domain errors), 2 usage or configuration errors, 3
// verification battery failure. Implemented in the library so tests can
// drive the CLI in-process as well as through the installed binary.
int run_cli(int argc, char** argv);

}  // namespace lifeplan
