#include "conepme/harness/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace conepme::harness {

bool compare(double measured, const std::string& relation, double threshold) {
  if (std::isnan(measured)) return false;
  if (relation == "<=") return measured <= threshold;
  if (relation == ">=") return measured >= threshold;
  if (relation == "<") return measured < threshold;
  if (relation == ">") return measured > threshold;
  throw std::invalid_argument("unknown relation " + relation);
}

bool VerificationReport::check(const std::string& name, double measured, const std::string& relation,
                               double threshold) {
  Assertion a{name, measured, relation, threshold, compare(measured, relation, threshold)};
  assertions.push_back(a);
  return a.passed;
}

bool VerificationReport::passed() const {
  if (!preconditions_failed.empty()) return false;
  for (const auto& a : assertions)
    if (!a.passed) return false;
  return true;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["passed"] = passed();
  j["assertions"] = nlohmann::json::array();
  for (const auto& a : assertions)
    j["assertions"].push_back({{"name", a.name},
                               {"measured", number(a.measured)},
                               {"relation", a.relation},
                               {"threshold", number(a.threshold)},
                               {"passed", a.passed}});
  j["preconditions_failed"] = preconditions_failed;
  j["details"] = details;
  j["provenance"] = {{"config_hash", config_hash}, {"seed", seed}};
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_series_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("write_series_csv: header/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("write_series_csv: ragged columns");
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c][r];
    out << '\n';
  }
}

}  // namespace conepme::harness
