#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kframes::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Entry point behind the kframes executable. Data goes to `out` (or the
/// --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kframes::cli
