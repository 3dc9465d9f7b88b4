#pragma once

#include <iosfwd>

namespace blindtrade::cli {

/// The blindtrade command line. Returns the process exit status.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blindtrade::cli
