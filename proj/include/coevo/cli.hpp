#pragma once

#include <iosfwd>

namespace coevo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the `coevo` tool. Subcommands: simulate, enumerate,
// check-conditions, best-response, sweep, validate.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coevo
