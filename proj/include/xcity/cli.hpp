#pragma once

namespace xcity {

// Exit codes: 0 success/feasible, 1 usage/IO/schema error, 2 solver-declared
// infeasible or budget exhausted, 3 validation failure.
int run_cli(int argc, const char* const* argv);

}  // namespace xcity
