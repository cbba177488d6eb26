#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ufb {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string relation = "<=";  // measured relation bound
  double bound = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::string filter;            // substring of the check name; empty runs all
  double tolerance_scale = 1.0;  // multiplies every upper-bound tolerance
  std::uint64_t seed = 1;
  int workers = 1;
};

struct Check {
  std::string name;
  std::function<CheckResult(const VerifyOptions&)> run;
};

const std::vector<Check>& verify_checks();

/// Runs the selected checks on a worker pool; results keep registry order.
std::vector<CheckResult> run_verify(const VerifyOptions& opts);

/// One line per check, then a summary line. No timings, so repeated runs
/// with the same options produce identical bytes.
std::string format_verify_report(const std::vector<CheckResult>& results);

}  // namespace ufb
