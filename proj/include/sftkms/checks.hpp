#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sftkms/kms.hpp"

namespace sftkms {

/// Inputs for one verification run.  Random samples are drawn from streams
/// derived from (seed, sample index), so reports are reproducible.
struct CheckContext {
  CheckContext(Sft s, CylFn potential) : sft(std::move(s)), h(std::move(potential)) {}

  Sft sft;
  CylFn h;
  int depth_test = 4;  // full-basis depth for algebraic identities
  int depth_ops = 5;   // matrix truncation depth
  int samples = 200;
  int kms_samples = 1000;
  int ground_samples = 100;
  double z_max = 10.0;
  std::uint64_t seed = 1;
  std::optional<double> beta;            // fixed temperature; Bowen solve otherwise
  std::optional<CylMeasure> measure;     // externally supplied state data
};

struct CheckResult {
  std::string name;
  std::string status;  // "pass" | "fail" | "skip"
  double residual = 0.0;
  double tolerance = 0.0;
  std::string note;
};

/// Runs every registered suite; results are ordered by suite name.
std::vector<CheckResult> run_property_suites(const CheckContext& ctx);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace sftkms
