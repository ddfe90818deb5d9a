#pragma once

// Batch front end. Subcommands:
//   check FILE            every conjecture against the premises, within bounds
//   sat FILE              satisfiability of the premises
//   prove FILE SCRIPT     proof script under the layer of the file's logic
//   corpus NAME|all       verification suite of an argument variant
//   aot [CONFIG]          Aczel model reports (--census, --theory, --worlds N)
// Global flags: --format=text|tsv, --workers N.
//
// Exit codes: 0 verdict as expected, 1 verdict contradicts the expectation,
// 2 usage, parse or input error, 3 budget exceeded.

#include <iosfwd>
#include <string>
#include <vector>

namespace qml {

enum ExitCode { kAsExpected = 0, kContradicts = 1, kUsage = 2, kBudget = 3 };

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qml
