#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "trajectory.hpp"

namespace am {

/// Streaming registers that reproduce the per-tau conditional variance
/// estimates in O(t) work per new step. Sums for tau are centred on the
/// plug-in mean g0 current when tau entered; with e = f / q_tau(s) - g0,
///   x = sum q_tau e^2,  y = sum q_tau e,  z = sum q_tau   over D_t \ D_tau
/// and a, b, c are the beta-weighted coefficients of the quadratic in
/// G - g0, with u the beta mass.
class VarianceAccumulator {
 public:
  /// Folds in step t = steps() + 1. `q_hist[k]` must hold q_{k+1}(s_t) for
  /// k = 0..t-1 (its last entry is step.q). `combined_prev` is the combined
  /// estimate the plug-in mean is built from.
  std::span<const double> update(const StepRecord& step, std::span<const double> q_hist,
                                 double beta, double combined_prev);

  std::size_t steps() const noexcept { return var_.size(); }
  /// Var_hat_tau for tau = 1..steps(), as of the last update.
  std::span<const double> var_hats() const noexcept { return var_; }

  struct Registers {
    double x, y, z, a, b, c, u, partial, shift;
  };
  Registers registers(std::size_t tau) const;

 private:
  std::vector<double> x_, y_, z_, a_, b_, c_, u_, partial_, shift_, var_;
};

/// Var_hat_{tau,r} with plug-in mean `mean` (the O(t^2) reference route).
double var_single(const Trajectory& run, std::size_t tau, std::size_t r, double mean);

/// LURE-mixed Var_hat_tau over r = tau..t; n is the number of units that
/// were unlabeled at step 1.
double var_tau(const Trajectory& run, std::size_t tau, std::size_t t, double mean, std::size_t n);

/// All Var_hat_tau at step t computed naively, with G_{tau,t} = combined_prev - F(D_tau).
std::vector<double> var_taus_naive(const Trajectory& run, std::size_t t, double combined_prev,
                                   std::size_t n);

/// G_{tau,t} = F_hat_{1:t-1} - F(D_tau).
double plug_in_mean(const Trajectory& run, std::size_t tau, double combined_prev);

/// sum alpha_bar^2 Var_hat_tau, before flooring.
double var_combined_raw(std::span<const double> weights, std::span<const double> var_hats);
/// sum alpha_bar^2 Var_hat_tau, floored at zero.
double var_combined(std::span<const double> weights, std::span<const double> var_hats);
/// sum alpha_bar^2 (F_hat_tau - F_hat_{1:t})^2.
double var_simple(std::span<const double> weights, std::span<const double> estimates,
                  double combined);

/// Inverse standard normal CDF (Wichura AS241), ~1e-16 relative accuracy.
double normal_quantile(double p);
/// Two-sided critical value for a central interval of the given level.
double z_for_level(double level);

std::pair<double, double> confidence_interval(double estimate, double var_hat, double level);

}  // namespace am
