#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tbc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one invocation. `args` excludes the program name. Progress and diagnostics go to
/// `err`; only the `fixtures` listing and help text use `out`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tbc::cli
