#pragma once

// Machine-readable verification reports.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace conepme::harness {

struct Assertion {
  std::string name;
  double measured = 0.0;
  std::string relation;  // "<=", ">=", "<", ">"
  double threshold = 0.0;
  bool passed = false;
};

struct VerificationReport {
  std::string suite;
  std::vector<Assertion> assertions;
  std::vector<std::string> preconditions_failed;
  nlohmann::json details = nlohmann::json::object();
  std::string config_hash;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;

  // Appends and returns the outcome. NaN never passes.
  bool check(const std::string& name, double measured, const std::string& relation, double threshold);
  bool passed() const;
  // Deterministic part only; runtimes go to the "timing" object.
  nlohmann::json to_json() const;
};

bool compare(double measured, const std::string& relation, double threshold);

// Writes indented JSON, creating parent directories.
void write_json(const std::string& path, const nlohmann::json& j);

// Columns of equal length under a header row.
void write_series_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

}  // namespace conepme::harness
