#pragma once

namespace splinequad {

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 on success, 1 when a search fails to converge, 2 on usage or I/O errors.
int run_cli(int argc, const char* const* argv);

}  // namespace splinequad
