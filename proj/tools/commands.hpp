#pragma once

#include <iosfwd>

namespace spn::cli {

/// Exit codes: 0 success, 1 domain or validation failure, 2 I/O or format failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

/// Entry point shared by the `spn` executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spn::cli
