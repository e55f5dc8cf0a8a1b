#include <cstdio>
#include <iostream>

#include "magflow/acceptance.hpp"

int main() {
  int failures = 0;
  for (int id = 1; id <= magflow::kCriterionCount; ++id) {
    const magflow::CriterionResult r = magflow::run_criterion(id);
    std::cout << magflow::format_result(r) << std::endl;
    if (!r.pass) ++failures;
  }
  std::cout << (failures == 0 ? "acceptance: all criteria passed" : "acceptance: criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
