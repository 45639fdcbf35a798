#pragma once

#include <iosfwd>

#include "tumorsynth/error.hpp"

namespace tumorsynth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitHashMismatch = 12;

/// Stable process exit code for each library error category.
int exit_code(Errc code);

/// Entry point shared by the executable and the in-process tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tumorsynth::cli
