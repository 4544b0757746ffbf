#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace bronchometer::validation {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Published table rows used by the arithmetic checks.
struct GapRow {
  int x1a, y1a, x2a, y2a;
  int x1b, y1b, x2b, y2b;
  int gap;
};
struct BarRow {
  int dbap;
  double iad, ard, bar, wt;
};
struct ExpertRow {
  int dbap;
  double eiad, eoad, eard, eb, ew;
};

const std::vector<GapRow>& gap_rows();
const std::vector<BarRow>& bar_rows();
const std::vector<ExpertRow>& expert_rows();
// Expert rows whose listed wall thickness disagrees with (EOAD - EIAD) / 2.
const std::vector<int>& expert_wall_anomalies();

CriterionResult gap_arithmetic();
CriterionResult bar_arithmetic();
CriterionResult expert_wall_arithmetic();
CriterionResult diameter_oracle();
CriterionResult wall_oracle();
CriterionResult carina_phantoms();
CriterionResult carina_performance();
CriterionResult determinism(const std::filesystem::path& work_dir);
CriterionResult window_ordering();

// Runs all nine in order; `work_dir` holds the scratch scans for the determinism check.
std::vector<CriterionResult> run_all(const std::filesystem::path& work_dir,
                                     const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_line(const CriterionResult& r);

}  // namespace bronchometer::validation
