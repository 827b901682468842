#pragma once

// The nine acceptance criteria, each a self-contained run with pinned
// tolerances.

#include <functional>
#include <string>
#include <vector>

#include "conepme/harness/report.hpp"

namespace conepme::harness {

struct AcceptanceOptions {
  bool quick = false;     // fewer seeds and coarser grids where the criterion allows it
  std::vector<int> only;  // empty: all
  std::uint64_t seed = 1;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  VerificationReport report;
  std::string summary;  // key measured values
  double seconds = 0.0;
  bool passed() const { return report.passed(); }
};

struct Criterion {
  int id;
  std::string name;
  std::function<CriterionResult(const AcceptanceOptions&)> run;
};

const std::vector<Criterion>& acceptance_criteria();

// Runs the selected criteria in order; `on_done` sees each result as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o,
                                            const std::function<void(const CriterionResult&)>& on_done = {});

// "PASS  3  conservation and bounds  (mass drift 1.2e-15, ...)  [12.3 s]"
std::string format_line(const CriterionResult& r);

nlohmann::json acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace conepme::harness
