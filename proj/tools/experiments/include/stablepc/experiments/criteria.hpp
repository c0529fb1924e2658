#pragma once

#include <string>
#include <vector>

#include "stablepc/experiments/runner.hpp"

namespace stablepc::experiments {

struct CriterionResult {
  std::string id;           // e.g. "A1a"
  std::string description;
  bool passed = false;
  std::string detail;       // measured values behind the verdict
};

/// Checks the criteria that apply to the experiment's outputs. Missing runs
/// or measurements make the affected criterion fail rather than throw.
/// Returns an empty list for `custom`.
std::vector<CriterionResult> evaluate(const ExperimentOutput& out);

/// "PASS A1a  description  (detail)" style line.
std::string format_result(const CriterionResult& r);

}  // namespace stablepc::experiments
