#pragma once

// Command-line front end. Subcommands: phase-sweep, tolerance-sweep, sdp,
// bounds, rate-fit, smap.

#include <iosfwd>
#include <string>
#include <vector>

namespace pacmet {

/// Exit codes: 0 success, 1 usage/file/schema/domain errors, 2 solver
/// divergence or a duality gap above --tol.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pacmet
