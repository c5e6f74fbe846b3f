#pragma once

#include <iosfwd>

namespace aionfit {

/// Entry point of the aionfit command line tool. Returns 0 on success, 2 for
/// usage errors and 1 for runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aionfit
