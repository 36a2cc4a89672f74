#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "estimator.hpp"

namespace am {

enum class Method { Active, MC, MC_WOR, DIS, DIS_AIS, DIS_WOR, ActiveTesting, PPI };

Method parse_method(const std::string& name);
std::string method_name(Method m);
/// True for methods that run the without-replacement estimator loop.
bool is_wor(Method m);

/// (N / t) sum f over a uniform with-replacement sample.
double mc_estimate(std::span<const double> f, std::size_t n);
/// (1 / t) sum f / q over an iid sample from a fixed q.
double dis_estimate(std::span<const double> f, std::span<const double> q);
/// sum_s g(s) - (N / t) sum (g(s_tau) - f(s_tau)) over a uniform iid sample.
double ppi_estimate(double g_total, std::span<const double> g, std::span<const double> f,
                    std::size_t n);

/// Active-testing acquisition with the ground-truth loss |f - g|, clamped.
Proposal active_testing_acquisition(std::span<const double> f, std::span<const double> g,
                                    std::span<const std::size_t> unlabeled,
                                    const ClampPolicy& clamp);

struct MethodSetup {
  std::shared_ptr<const UnitPool> pool;
  std::shared_ptr<const Predictor> predictor;
  /// Weights of the active method; WOR baselines use their own defaults
  /// unless `baseline_scheme` is set.
  WeightScheme scheme = WeightScheme::comb();
  std::optional<WeightScheme> baseline_scheme;
  ClampPolicy clamp;
  std::size_t retrain_every = 1;
  double level = 0.95;
};

/// Run configuration for the without-replacement methods.
RunConfig wor_config(Method m, const MethodSetup& setup);
/// Predictor actually driving the proposal of a method.
std::shared_ptr<const Predictor> method_predictor(Method m, const MethodSetup& setup);

ActiveRun mc_wor(const MethodSetup& setup, std::size_t steps, std::uint64_t seed);
ActiveRun dis_wor(const MethodSetup& setup, std::size_t steps, std::uint64_t seed);

struct TracePoint {
  double estimate = 0.0;
  double var_cond = 0.0;
  double var_simp = 0.0;
  double base = 0.0;  // F_hat_t (WOR) or the t-th per-sample estimate
};

/// Per-step combined estimates for t = 1..steps. With-replacement methods
/// report the weighted deviation variance in both variance fields.
std::vector<TracePoint> run_method(Method m, const MethodSetup& setup, std::size_t steps,
                                   std::uint64_t seed);

/// DIS+AIS as a trace: with-replacement sampling whose proposal is refreshed
/// by the predictor on the distinct labeled units, combined by sqrt(t).
std::vector<TracePoint> dis_ais(const MethodSetup& setup, std::size_t steps, std::uint64_t seed);

}  // namespace am
