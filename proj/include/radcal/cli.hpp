#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace radcal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime / pipeline failure
inline constexpr int kExitUsage = 2;    // bad command line

// Entry point shared by the radcal executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace radcal::cli
