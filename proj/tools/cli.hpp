#pragma once

#include <iosfwd>

namespace amc::cli {

/// Exit codes: 0 success, 1 usage or domain error, 2 unreadable or invalid
/// program.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amc::cli
