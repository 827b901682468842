#pragma once

// Command line: spectrum, validate, solve, weak, compare, diagnose, suite.
// Exit codes: 0 success / all assertions pass, 1 invalid config or failed
// assertions, 2 usage errors. Relative output paths are placed under
// $CONEPME_OUTPUT_ROOT when it is set.

#include <iosfwd>
#include <string>
#include <vector>

namespace conepme::harness {

int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Output directory after applying $CONEPME_OUTPUT_ROOT.
std::string resolve_output(const std::string& dir);

}  // namespace conepme::harness
