#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pool.hpp"
#include "predictor.hpp"
#include "proposal.hpp"
#include "rng.hpp"
#include "trajectory.hpp"
#include "variance.hpp"
#include "weights.hpp"

namespace am {

/// Which combined estimate feeds the plug-in mean G_{tau,t}.
enum class PlugInMean {
  OwnScheme,  // F_hat_{1:t-1} under the run's own weights
  Lure,       // F_hat_{1:t-1} under LURE weights
  Exact,      // F(Omega); simulation pools only, for testing
};

struct RunConfig {
  WeightScheme scheme = WeightScheme::comb();
  ClampPolicy clamp;
  std::size_t retrain_every = 1;  // 0: never re-invoke the predictor
  double level = 0.95;
  PlugInMean plug_in = PlugInMean::OwnScheme;
};

struct EstimateReport {
  std::size_t t = 0;
  double estimate = 0.0;
  double var_cond = 0.0;
  double var_simp = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double level = 0.95;
  bool caveat = false;  // weights were estimated (INV); coverage may be poorer

  friend bool operator==(const EstimateReport&, const EstimateReport&) = default;
};

/// F(D) + f / q.
double step_estimate(double partial, double f, double q);

/// sum w_tau * estimate_tau with normalized weights.
double combine(std::span<const double> estimates, std::span<const double> weights);

/// One active-measurement run. Sampling and labeling are separate calls so
/// a human can answer between draw() and observe(); step() does both from
/// ground truth in simulation mode.
class ActiveRun {
 public:
  struct Draw {
    std::size_t unit = 0;
    double q = 0.0;
  };

  /// The predictor is invoked on the initial labeled set and then every
  /// `config.retrain_every` steps.
  ActiveRun(std::shared_ptr<const UnitPool> pool, std::shared_ptr<const Predictor> predictor,
            RunConfig config, std::uint64_t seed, LabeledSet initial = {});

  /// Prediction-table driven run (live mode); tables change only through
  /// push_predictions().
  ActiveRun(std::shared_ptr<const UnitPool> pool, PredictionTable predictions, RunConfig config,
            std::uint64_t seed, LabeledSet initial = {});

  /// Samples s_t from q_t, or returns the pending draw unchanged.
  const Draw& draw();
  const std::optional<Draw>& pending() const noexcept { return pending_; }

  /// Applies the label of the pending unit.
  EstimateReport observe(double value);
  /// Same, rejecting labels for any unit other than the pending one.
  EstimateReport observe(std::size_t unit, double value);
  /// draw() + observe(true value).
  EstimateReport step();

  /// Replaces the prediction table; takes effect at the next draw().
  void push_predictions(PredictionTable table);

  bool exhausted() const noexcept { return unlabeled_.empty(); }
  std::size_t t() const noexcept { return trajectory_.steps(); }
  /// Units unlabeled at step 1.
  std::size_t n_eff() const noexcept { return n_eff_; }

  EstimateReport report() const;
  const std::vector<EstimateReport>& history() const noexcept { return history_; }

  const UnitPool& pool() const noexcept { return *pool_; }
  const RunConfig& config() const noexcept { return config_; }
  const Trajectory& trajectory() const noexcept { return trajectory_; }
  const LabeledSet& labeled() const noexcept { return labeled_; }
  const PredictionTable& predictions() const noexcept { return table_; }
  std::span<const std::size_t> unlabeled() const noexcept { return unlabeled_; }
  /// F_hat_tau for tau = 1..t.
  std::span<const double> estimates() const noexcept { return estimates_; }
  /// Current Var_hat_tau, tau = 1..t (frozen at the terminal step).
  std::span<const double> var_hats() const noexcept { return accumulator_.var_hats(); }
  /// Current normalized weights alpha_bar_tau.
  std::span<const double> weights() const noexcept { return weights_; }
  double partial() const noexcept { return partial_; }

  std::size_t floor_events() const noexcept { return floor_events_; }
  std::size_t inv_fallbacks() const noexcept { return inv_fallbacks_; }

 private:
  void init(const LabeledSet& initial);
  double plug_in_source(std::size_t t) const;

  std::shared_ptr<const UnitPool> pool_;
  std::shared_ptr<const Predictor> predictor_;
  RunConfig config_;
  Rng rng_;
  LabeledSet labeled_;
  std::vector<std::size_t> unlabeled_;
  std::size_t n_eff_ = 0;
  double partial_ = 0.0;

  PredictionTable table_;
  std::shared_ptr<const std::vector<double>> weights_cache_;
  std::optional<Draw> pending_;

  Trajectory trajectory_;
  VarianceAccumulator accumulator_;
  std::vector<double> estimates_;
  std::vector<double> combined_;
  std::vector<double> weights_;
  std::vector<EstimateReport> history_;
  std::size_t floor_events_ = 0;
  std::size_t inv_fallbacks_ = 0;
};

using LabelCallback = std::function<double(const Unit& unit, double q)>;

/// Runs T steps answering labels from ground truth.
ActiveRun run_active_measurement(std::shared_ptr<const UnitPool> pool,
                                 std::shared_ptr<const Predictor> predictor, RunConfig config,
                                 std::size_t steps, std::uint64_t seed, LabeledSet initial = {});

/// Runs T steps answering labels through a callback.
ActiveRun run_active_measurement(std::shared_ptr<const UnitPool> pool,
                                 std::shared_ptr<const Predictor> predictor, RunConfig config,
                                 std::size_t steps, std::uint64_t seed, const LabelCallback& label,
                                 LabeledSet initial = {});

/// One record per step: tau, unit, f, q, estimate, combined, var_cond, var_simp.
void write_trajectory_csv(std::ostream& out, const ActiveRun& run);
void write_trajectory_jsonl(std::ostream& out, const ActiveRun& run);

}  // namespace am
