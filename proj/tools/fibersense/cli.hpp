#pragma once

namespace fibersense::app {

/// Exit codes of the fibersense executable.
enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kFormat = 3 };

/// Parses the command line and runs the requested verb; returns an exit code.
int run_cli(int argc, char** argv);

}  // namespace fibersense::app
