#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "battery.hpp"

namespace rflab::battery {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;  // 0 when the criterion has no runtime budget
  std::string summary;          // one-line measured values
  Json metrics;
};

struct AcceptanceOptions {
  unsigned workers = 0;
  std::uint64_t seed = 0;
};

inline constexpr int kCriterionCount = 10;

// Evaluates criterion `id` (1-based). Exceptions become a failed result.
CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});

std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& options = {},
    const std::function<void(const CriterionResult&)>& on_result = {});

// "[PASS] 3 derivative formulas: ..." style line.
std::string format_line(const CriterionResult& result);

Json criterion_json(const CriterionResult& result);

}  // namespace rflab::battery
