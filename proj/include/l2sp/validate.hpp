#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace l2sp {

enum class Preset { Quick, Full };

const char* to_string(Preset p);

/// One validation criterion outcome. pass is `measured cmp tolerance`
/// (and within the runtime budget when one applies).
struct CriterionResult {
  std::string id;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string cmp = "<=";
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double seconds_limit = 0.0;  // 0 = no budget
};

/// Run the validation suite. Quick uses reduced Monte Carlo budgets with the
/// same tolerances; Full runs the stated budgets and additionally reruns the
/// quick suite to check CSV-level determinism.
std::vector<CriterionResult> run_validation(Preset preset, std::uint64_t seed,
                                            int threads);

bool all_pass(const std::vector<CriterionResult>& results);

/// Deterministic CSV rendering (no timing columns).
std::string render_report_csv(const std::vector<CriterionResult>& results);

nlohmann::json render_report_json(const std::vector<CriterionResult>& results,
                                  Preset preset, std::uint64_t seed);

}  // namespace l2sp
