#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pgl {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::string cache_dir = "acceptance_cache";  // f-hat and half-plane tables are reused from here
  std::vector<int> only;                       // empty runs all sixteen
};

/// One line: PASS/FAIL, id, title, measured values.
std::string format_result(const CriterionResult& r);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace pgl
