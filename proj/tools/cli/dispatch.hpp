#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netdiff::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on a module or I/O error and 2 on a usage error; errors are reported on
/// `err` as a one-line JSON object {"error": CODE, "message": TEXT}.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace netdiff::cli
