#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "harness.hpp"

namespace am {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::size_t trials = 0;  // 0: the check's own default
  std::uint64_t seed = 20240601;
  std::size_t threads = 0;
};

/// N = 50 clustered pool with a noisy predictor.
ExperimentConfig standard_config();
/// N = 200 clustered pool with an improving predictor.
ExperimentConfig ordering_config();

/// Mean of F_hat_{1:t} within 3 SE of F(Omega); SQRT, LURE, COMB; t in {10, 25, 40}.
CheckResult check_unbiased(const CheckOptions& opt);
/// Cov(F_hat_5, F_hat_20) within 3 SE of zero.
CheckResult check_zero_covariance(const CheckOptions& opt);
/// Oracle predictions give the exact total at every step.
CheckResult check_oracle(const CheckOptions& opt);
/// Without-replacement methods recover F(Omega) at t = N.
CheckResult check_exhaustion(const CheckOptions& opt);
/// Streaming per-tau variance estimates match the direct sums.
CheckResult check_streaming(const CheckOptions& opt);
/// Per-step accumulator cost grows at most like t^1.3.
CheckResult check_streaming_slope(const CheckOptions& opt);
/// Worst-case ratios of the LURE and uniform families and COMB model ratios stay under 9/8.
CheckResult check_bound(const CheckOptions& opt);
/// Fixed-weight ordering and the INV non-inferiority checks.
std::vector<CheckResult> check_weighting_order(const CheckOptions& opt);
/// Coverage of both interval constructions at t/N in {0.3, 0.5, 0.7, 0.9}.
CheckResult check_coverage(const CheckOptions& opt);
/// Active measurement beats every baseline at t/N = 0.3.
std::vector<CheckResult> check_baseline_order(const CheckOptions& opt);

/// Suites: bound, unbiased, streaming, coverage, ordering, all.
std::vector<CheckResult> run_suite(const std::string& suite, const CheckOptions& opt);
std::vector<std::string> suite_names();

std::string format_results(const std::vector<CheckResult>& results);

}  // namespace am
