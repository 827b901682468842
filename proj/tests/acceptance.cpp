// Runs the nine acceptance criteria and prints one PASS/FAIL line each.
// Exit status 0 iff every criterion passes.

#include <cstdlib>
#include <iostream>

#include "conepme/harness/acceptance.hpp"

int main(int argc, char** argv) {
  conepme::harness::AcceptanceOptions o;
  for (int k = 1; k < argc; ++k)
    if (std::string(argv[k]) == "--quick") o.quick = true;
  int failed = 0;
  conepme::harness::run_acceptance(o, [&](const conepme::harness::CriterionResult& r) {
    std::cout << conepme::harness::format_line(r) << std::endl;
    if (!r.passed()) ++failed;
  });
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : "acceptance: all criteria passed")
            << std::endl;
  return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
