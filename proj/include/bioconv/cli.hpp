#pragma once

#include <ostream>

namespace bioconv {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,        ///< bad arguments, unreadable or invalid config/fields
    kExitCertificate = 2,  ///< existence checks or a-priori audit failed
    kExitDivergence = 3,   ///< Picard divergence or no convergence
};

/// Entry point of the `bioconv` tool. Subcommands: certify, solve, verify, mms.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bioconv
