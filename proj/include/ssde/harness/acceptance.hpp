#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace ssde::harness {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;  // one line of key numbers
  nlohmann::json data = nlohmann::json::object();
  double seconds = 0.0;
};

/// Runs the acceptance criteria (all when `only` is empty), in id order.
/// A criterion that throws is reported as failed with the error text.
/// `on_result` is called as each criterion finishes.
std::vector<CriterionResult> run_acceptance(const std::set<int>& only = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS [3] resolvent positivity/contraction: ..." style line.
std::string format_result(const CriterionResult& r);

/// Number of criteria.
inline constexpr int kCriterionCount = 11;

}  // namespace ssde::harness
