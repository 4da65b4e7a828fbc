// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace atomdemix {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Subcommands: synth, solve, localize, certify, phase-transition,
/// crb-compare. `--config FILE` reads `key = value` lines named like the
/// long flags; flags given on the command line win.
int cli_main(int argc, const char* const* argv);

}  // namespace atomdemix
