#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cdsnet {

// Exit codes: 0 success / Found, 1 failed verification or unsatisfied
// decode, 2 Infeasible, 3 NotFound or Undecided, 64 usage error,
// 65 unreadable or malformed input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cdsnet
