#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wyflow/oracle.hpp"
#include "wyflow/scenario.hpp"

namespace wyflow {

struct CheckOutcome {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  std::vector<std::pair<std::string, oracle::RefinementReport>> reports;  // (file stem, report)
};

/// Runs the configured oracle suites on the scenario's background family.
/// Throws ConfigError when the suite list is empty.
std::vector<CheckOutcome> run_verify(const ScenarioConfig& config);

}  // namespace wyflow
