#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rflab {

/// Outcome of one acceptance criterion.
struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;
  double seconds = 0.0;
};

/// identities, linearization, estimates, spectra, all
const std::vector<std::string>& suite_names();
/// Criterion ids of a suite; throws DomainError for an unknown name.
std::vector<int> suite_criteria(const std::string& suite);

/// Runs criterion 1..13. Exceptions inside a check become a failed result.
CheckResult run_criterion(int id);
std::vector<CheckResult> run_suite(const std::string& suite);

/// One line: "[PASS] 3 comparison-ode: ..." or "[FAIL] ...".
std::string summary_line(const CheckResult& r);

}  // namespace rflab
