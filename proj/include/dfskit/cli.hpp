#pragma once

#include <iosfwd>

namespace dfskit {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point of the dfskit command line. Returns 0 on success, 2 on input
/// validation errors, 3 when a numerical guard trips.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dfskit
