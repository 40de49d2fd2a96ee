#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fkr {

enum class Suite { quick, full };
Suite suite_from_string(const std::string& s);

struct AcceptanceOptions
{
  Suite suite = Suite::full;
  unsigned threads = 0;
  std::uint64_t seed = 20240611;
  std::vector<int> only; // criterion ids; empty runs all
};

struct CriterionResult
{
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0; // 0 = no limit
};

// "PASS 5 cor32 dominance (12.3 s / 300 s): ..." style line.
std::string format_result(const CriterionResult& r);

// Runs the selected criteria in order; each line is written to progress as
// soon as the criterion finishes. Runtime limits apply to the full suite only.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream* progress = nullptr);

} // namespace fkr
