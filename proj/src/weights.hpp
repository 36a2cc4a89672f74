#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace am {

enum class SchemeKind { Sqrt, Lure, Comb, Inv };

struct WeightScheme {
  SchemeKind kind = SchemeKind::Comb;
  double gamma = 0.5;  // INV only

  static WeightScheme sqrt() { return {SchemeKind::Sqrt, 0.0}; }
  static WeightScheme lure() { return {SchemeKind::Lure, 0.0}; }
  static WeightScheme comb() { return {SchemeKind::Comb, 0.0}; }
  static WeightScheme inv(double gamma = 0.5);

  /// Parses `sqrt|lure|comb|inv`; gamma applies to inv only.
  static WeightScheme parse(const std::string& name, double gamma = 0.5);
  std::string name() const;
};

/// w_tau = 1 / ((N - tau)(N - tau + 1)), for 1 <= tau < N.
double lure_weight(std::size_t tau, std::size_t n);

std::vector<double> sqrt_weights(std::size_t t);
std::vector<double> lure_weights(std::size_t t, std::size_t n);
std::vector<double> comb_weights(std::size_t t, std::size_t n);

/// Inverse estimated variances up to the junction ceil(gamma t), continued by
/// the COMB shape scaled to be continuous at the junction. var_hats[k] is
/// the estimate for tau = k + 1.
std::vector<double> inv_weights(std::span<const double> var_hats, double gamma, std::size_t t,
                                std::size_t n);

/// ceil(gamma t), clamped to [1, t].
std::size_t inv_junction(double gamma, std::size_t t);

std::vector<double> normalize(std::span<const double> weights);

/// l_{0.5}(1, t) = (sum w)(sum w tau) / (sum w sqrt(tau))^2 over tau = 1..t.
/// Requires positive, non-decreasing weights.
double worst_case_ratio(std::span<const double> w, std::size_t t);

struct SchemeWeights {
  std::vector<double> normalized;
  bool fallback = false;  // INV had to substitute or fall back to COMB
};

/// Normalized weights of a scheme at step t (t < n). For INV, nonpositive
/// variance estimates below the junction are replaced by the smallest
/// positive one; with none available the step falls back to COMB.
SchemeWeights scheme_weights(const WeightScheme& scheme, std::size_t t, std::size_t n,
                             std::span<const double> var_hats);

}  // namespace am
