#pragma once

namespace bandit {

// Entry point behind the banditsim binary; exposed so tests can drive the
// CLI in-process. Returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace bandit
