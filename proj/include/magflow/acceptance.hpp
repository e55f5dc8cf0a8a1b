#pragma once

#include <string>
#include <vector>

namespace magflow {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 10;

/// Runs one acceptance criterion (1..10). Never throws; failures are reported.
CriterionResult run_criterion(int id);

std::vector<CriterionResult> run_acceptance_suite();

/// "[PASS]  3  obstructed limit (case b) ... detail (1.2 s)"
std::string format_result(const CriterionResult& r);

}  // namespace magflow
