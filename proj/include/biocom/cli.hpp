#pragma once

#include <iosfwd>

namespace biocom {

/// Runs the `biocom` command line. Returns 0 on success, 2 on a usage error
/// and 1 on any other failure (diagnostic on `err`).
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace biocom
