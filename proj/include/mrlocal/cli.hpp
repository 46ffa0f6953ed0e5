#pragma once

#include <ostream>

namespace mrlocal {

/// Entry point of the `mrlocal` command. Subcommands: analyze, simulate,
/// benchmark, density. Returns 0 on success, 2 on bad input or usage,
/// 3 when an estimator degenerates.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mrlocal
