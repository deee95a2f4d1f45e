#pragma once

#include <iosfwd>

namespace valleyfinder::cli {

/// Runs the valleyfinder command line. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace valleyfinder::cli
