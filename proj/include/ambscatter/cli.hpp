#pragma once

#include <iosfwd>

namespace ambscatter {

// Exit codes: 0 ok, 1 constraint violation / no sync, 2 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace ambscatter
