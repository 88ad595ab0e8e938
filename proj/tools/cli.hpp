#pragma once

#include <ostream>

namespace detgeom::cli {

// Exit codes of the detgeom tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Parses argv and runs one subcommand, writing reports to `out` and
// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace detgeom::cli
