#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcmrecon {

/// Command-line entry point: `solve`, `reconstruct`, `compare`, `report`.
/// Returns 0 on success, 1 for user errors, 2 for numerical failures;
/// failures print a JSON error object on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcmrecon
