#pragma once

namespace nfaq {

// Dispatches one CLI invocation. Exit contract: 0 success, 2 input/schema
// error, 3 UNDERSPECIFIED, 4 AMBIGUOUS, 5 execution exhaustion, 6 internal
// fault. Machine output goes to stdout, diagnostics to stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace nfaq
