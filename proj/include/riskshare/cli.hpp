#pragma once

#include <iosfwd>

namespace riskshare {

/// Exit codes: 0 ok, 1 verify mismatch, 2 unsolvable, 3 invalid input, 4 infeasible constraints.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace riskshare
