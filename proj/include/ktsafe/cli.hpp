#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ktsafe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitUnsafe = 2;
inline constexpr int kExitIo = 3;

inline constexpr int kReportVersion = 1;

/// `args` excludes the program name.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_run(int argc, char** argv);

}  // namespace ktsafe
