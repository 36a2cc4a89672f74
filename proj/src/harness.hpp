#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "baselines.hpp"

namespace am {

struct PoolSpec {
  std::string file;  // when set, the pool is loaded instead of generated
  std::string kind = "clustered";
  std::size_t n = 50;
  std::uint64_t seed = 7;
  std::size_t bumps = 3;     // clustered: number of density bumps
  double spread = 1.5;       // clustered: bump width in grid cells
  double mass = 200.0;       // clustered: total count per bump
  double background = 1.0;   // clustered: count added to every unit
  double lo = 0.0;           // uniform
  double hi = 10.0;          // uniform
  bool integer = true;       // round generated values
};

struct PredictorSpec {
  std::string kind = "noisy";  // oracle|uniform|noisy|improving|checkpoint
  double bias = 1.0;
  double sigma = 0.5;
  double sigma0 = 1.0;
  double decay = 1.0;
  std::uint64_t seed = 13;
  std::string checkpoint_file;
};

struct ExperimentConfig {
  PoolSpec pool;
  PredictorSpec predictor;
  Method method = Method::Active;
  WeightScheme scheme = WeightScheme::comb();
  double gamma = 0.5;
  std::optional<WeightScheme> baseline_scheme;
  ClampPolicy clamp;
  std::vector<std::size_t> t_grid;   // explicit steps
  std::vector<double> t_fracs;       // or fractions of N
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  double level = 0.95;
  std::size_t retrain_every = 1;
  std::string out;
  std::string format = "csv";
  std::size_t threads = 0;  // 0: ACTIVE_MEASURE_THREADS or hardware concurrency
};

/// Flat `key = value` text; `#` starts a comment line.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Effective configuration as `key = value` lines.
std::string config_to_text(const ExperimentConfig& cfg);

/// Synthetic pool: `clustered` places Gaussian bumps of counts on a virtual
/// square grid, `uniform` draws iid values in [lo, hi].
UnitPool generate_pool(const PoolSpec& spec);
std::shared_ptr<const UnitPool> make_pool(const PoolSpec& spec);
std::shared_ptr<const Predictor> make_predictor(const PredictorSpec& spec, const UnitPool& pool);
MethodSetup make_setup(const ExperimentConfig& cfg, std::shared_ptr<const UnitPool> pool);

/// Resolved step grid, sorted and deduplicated.
std::vector<std::size_t> resolve_grid(const ExperimentConfig& cfg, std::size_t n);

double fractional_error(std::span<const double> estimates, double truth);
double coverage(std::span<const double> estimates, std::span<const double> var_hats,
                double truth, double level);

/// Per-trial values at each grid step, row-major [trial][grid index].
struct TrialMatrix {
  std::vector<std::size_t> grid;
  std::size_t trials = 0;
  std::vector<double> estimate;
  std::vector<double> var_cond;
  std::vector<double> var_simp;
  std::vector<double> base;

  double at(const std::vector<double>& v, std::size_t trial, std::size_t g) const {
    return v[trial * grid.size() + g];
  }
  std::vector<double> column(const std::vector<double>& v, std::size_t g) const;
};

std::size_t worker_count(std::size_t requested);

/// Runs cfg.trials independent trials; trial m uses derive_seed(cfg.seed, m).
TrialMatrix collect_trials(const ExperimentConfig& cfg, std::shared_ptr<const UnitPool> pool);

struct MetricsRow {
  std::string method;
  std::string scheme;
  std::size_t t = 0;
  double fractional_error_mean = 0.0;
  double fractional_error_se = 0.0;
  double coverage = 0.0;
  double coverage_simp = 0.0;
  double ci_radius_mean_relative = 0.0;
  double estimate_mean = 0.0;
  double estimate_se = 0.0;
  std::size_t trials = 0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

std::vector<MetricsRow> summarize(const TrialMatrix& m, double truth, double level,
                                  const std::string& method, const std::string& scheme);
std::vector<MetricsRow> run_trials(const ExperimentConfig& cfg);

void export_results(const std::vector<MetricsRow>& rows, std::ostream& out,
                    const std::string& format, const std::string& header_comment = {});
void export_results(const std::vector<MetricsRow>& rows, const std::filesystem::path& path,
                    const std::string& format, const std::string& header_comment = {});
std::vector<MetricsRow> read_results(std::istream& in, const std::string& format);

/// Closed-form variance model Var[F_hat_tau] = c tau^-y / w_tau with
/// w_tau the LURE weights of an N-unit pool.
struct VarianceModelConfig {
  std::vector<double> ys{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<WeightScheme> schemes{WeightScheme::sqrt(), WeightScheme::lure(),
                                    WeightScheme::comb()};
  std::size_t n = 1000;
  std::size_t t_max = 2000;  // clipped to N - 1
  double c = 1.0;
};

struct RatioRow {
  std::string scheme;
  double y = 0.0;
  std::size_t t = 0;
  double ratio = 0.0;  // Var[scheme] / Var[inverse true variance weights]
};

std::vector<RatioRow> variance_model_compare(const VarianceModelConfig& cfg);

}  // namespace am
