#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kdesat::cli {

// args excludes the program name. Exit codes: 0 sat/valid/true,
// 1 unsat/invalid/false/disagreement, 2 usage, parse or budget errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kdesat::cli
