#pragma once

#include <iosfwd>

namespace ctmdp::cli {

/// Runs one command line. The JSON report goes to `out`, help and usage text to `err`.
/// Exit codes: 0 success, 1 negative verdict when requested, 2 input or usage error.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace ctmdp::cli
