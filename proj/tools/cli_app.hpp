#pragma once

namespace l2sp {

/// Entry point for the l2sp command-line tool; returns the process exit code
/// (0 success, 1 runtime/convergence failure, 2 invalid input).
int cli_run(int argc, const char* const* argv);

}  // namespace l2sp
