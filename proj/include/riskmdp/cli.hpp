#pragma once

#include <ostream>

namespace riskmdp {

enum ExitCode : int {
    kExitOk = 0,
    kExitInvalid = 1, // schema/validation failure, axiom violations, zero-probability observation
    kExitUsage = 2,   // bad flags, unreadable paths, arguments outside their domain
    kExitCap = 3,     // enumeration cap exceeded
};

/// riskmdp <validate|solve|evaluate|oracle|simulate|check-axioms|beliefs> [flags]
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace riskmdp
