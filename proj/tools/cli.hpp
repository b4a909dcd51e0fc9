#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semidx::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_domain = 1;
inline constexpr int exit_usage = 2;

// Runs one command line (args excludes the program name). The store
// location comes from --store, then $SEMIDX_STORE, then ./semidx-store.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semidx::cli
