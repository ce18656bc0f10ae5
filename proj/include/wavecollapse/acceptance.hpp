#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wavecollapse/ensemble.hpp"

namespace wavecollapse {

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Comparison> checks;
  double seconds = 0.0;
  double time_limit = 0.0;  // seconds; 0 = no runtime requirement

  bool within_time() const { return time_limit <= 0.0 || seconds <= time_limit; }
  bool passed() const { return all_passed(checks) && within_time(); }
};

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::vector<int> only;  // criterion ids to run; empty = all
  // Called as each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int kCriterionCount = 10;

// Runs the acceptance criteria with their pinned parameters. Only the master
// seed and the worker count are configurable.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

// One criterion by id (1..10).
CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});

// "[PASS] 1 collapse width: ..." style one-line summary.
std::string summary_line(const CriterionResult& result);

// Report with the elapsed times confined to one line, so two runs differ only
// there.
std::string acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace wavecollapse
