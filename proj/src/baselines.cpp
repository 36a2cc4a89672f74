#include "baselines.hpp"

#include <cmath>

#include "errors.hpp"

namespace am {

Method parse_method(const std::string& name) {
  if (name == "active") return Method::Active;
  if (name == "mc") return Method::MC;
  if (name == "mc_wor") return Method::MC_WOR;
  if (name == "dis") return Method::DIS;
  if (name == "dis_ais") return Method::DIS_AIS;
  if (name == "dis_wor") return Method::DIS_WOR;
  if (name == "active_testing") return Method::ActiveTesting;
  if (name == "ppi") return Method::PPI;
  fail(ErrorCode::Config, "unknown method: " + name);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Active: return "active";
    case Method::MC: return "mc";
    case Method::MC_WOR: return "mc_wor";
    case Method::DIS: return "dis";
    case Method::DIS_AIS: return "dis_ais";
    case Method::DIS_WOR: return "dis_wor";
    case Method::ActiveTesting: return "active_testing";
    case Method::PPI: return "ppi";
  }
  return "?";
}

bool is_wor(Method m) {
  return m == Method::Active || m == Method::MC_WOR || m == Method::DIS_WOR ||
         m == Method::ActiveTesting;
}

double mc_estimate(std::span<const double> f, std::size_t n) {
  if (f.empty()) fail(ErrorCode::Precondition, "MC estimate needs at least one sample");
  double sum = 0.0;
  for (double v : f) sum += v;
  return static_cast<double>(n) / static_cast<double>(f.size()) * sum;
}

double dis_estimate(std::span<const double> f, std::span<const double> q) {
  if (f.size() != q.size()) fail(ErrorCode::Shape, "values and probabilities differ in length");
  if (f.empty()) fail(ErrorCode::Precondition, "DIS estimate needs at least one sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(q[i] > 0.0)) fail(ErrorCode::Domain, "proposal probability must be > 0");
    sum += f[i] / q[i];
  }
  return sum / static_cast<double>(f.size());
}

double ppi_estimate(double g_total, std::span<const double> g, std::span<const double> f,
                    std::size_t n) {
  if (f.size() != g.size()) fail(ErrorCode::Shape, "paired samples differ in length");
  if (f.empty()) fail(ErrorCode::Precondition, "PPI estimate needs at least one sample");
  double resid = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) resid += g[i] - f[i];
  return g_total - static_cast<double>(n) / static_cast<double>(f.size()) * resid;
}

Proposal active_testing_acquisition(std::span<const double> f, std::span<const double> g,
                                    std::span<const std::size_t> unlabeled,
                                    const ClampPolicy& clamp) {
  if (f.size() != g.size()) fail(ErrorCode::Shape, "f and g differ in length");
  PredictionTable loss(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) loss.set(i, std::abs(f[i] - g[i]));
  return build_proposal(loss, unlabeled, clamp);
}

std::shared_ptr<const Predictor> method_predictor(Method m, const MethodSetup& setup) {
  switch (m) {
    case Method::MC:
    case Method::MC_WOR:
    case Method::PPI:
      return std::make_shared<UniformPredictor>();
    case Method::DIS:
    case Method::DIS_WOR:
      return std::make_shared<FrozenPredictor>(setup.predictor, *setup.pool);
    case Method::ActiveTesting:
      return std::make_shared<OracleLossPredictor>(setup.predictor);
    case Method::Active:
    case Method::DIS_AIS:
      return setup.predictor;
  }
  return setup.predictor;
}

RunConfig wor_config(Method m, const MethodSetup& setup) {
  RunConfig cfg;
  cfg.clamp = setup.clamp;
  cfg.level = setup.level;
  cfg.retrain_every = setup.retrain_every;
  switch (m) {
    case Method::Active:
      cfg.scheme = setup.scheme;
      break;
    case Method::ActiveTesting:
      cfg.scheme = setup.baseline_scheme.value_or(WeightScheme::comb());
      break;
    case Method::MC_WOR:
    case Method::DIS_WOR:
      cfg.scheme = setup.baseline_scheme.value_or(WeightScheme::lure());
      cfg.retrain_every = 0;
      break;
    default:
      fail(ErrorCode::Config, method_name(m) + " is not a without-replacement method");
  }
  return cfg;
}

ActiveRun mc_wor(const MethodSetup& setup, std::size_t steps, std::uint64_t seed) {
  return run_active_measurement(setup.pool, method_predictor(Method::MC_WOR, setup),
                                wor_config(Method::MC_WOR, setup), steps, seed);
}

ActiveRun dis_wor(const MethodSetup& setup, std::size_t steps, std::uint64_t seed) {
  return run_active_measurement(setup.pool, method_predictor(Method::DIS_WOR, setup),
                                wor_config(Method::DIS_WOR, setup), steps, seed);
}

namespace {

/// Running weighted mean of per-sample estimates and its deviation variance.
class WeightedTrace {
 public:
  TracePoint add(double weight, double x) {
    sw_ += weight;
    swx_ += weight * x;
    sw2_ += weight * weight;
    sw2x_ += weight * weight * x;
    sw2x2_ += weight * weight * x * x;
    const double mean = swx_ / sw_;
    double var = (sw2x2_ - 2.0 * mean * sw2x_ + mean * mean * sw2_) / (sw_ * sw_);
    if (!(var > 0.0)) var = 0.0;
    return {mean, var, var, x};
  }

 private:
  double sw_ = 0, swx_ = 0, sw2_ = 0, sw2x_ = 0, sw2x2_ = 0;
};

std::vector<std::size_t> all_units(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::vector<TracePoint> with_replacement(const MethodSetup& setup, bool adaptive, bool sqrt_law,
                                         std::shared_ptr<const Predictor> predictor,
                                         std::size_t steps, std::uint64_t seed) {
  const UnitPool& pool = *setup.pool;
  Rng rng(seed);
  const auto support = all_units(pool.size());
  LabeledSet distinct(pool.size());
  Proposal q = build_proposal(predictor->predict(pool, distinct), support, setup.clamp);
  WeightedTrace trace;
  std::vector<TracePoint> out;
  out.reserve(steps);
  for (std::size_t t = 1; t <= steps; ++t) {
    auto [unit, prob] = q.sample(rng);
    const double f = pool.truth(unit);
    const double w = sqrt_law ? std::sqrt(static_cast<double>(t)) : 1.0;
    out.push_back(trace.add(w, f / prob));
    if (!distinct.contains(unit)) distinct.add(unit, f);
    if (adaptive && setup.retrain_every > 0 && t % setup.retrain_every == 0)
      q = build_proposal(predictor->predict(pool, distinct), support, setup.clamp);
  }
  return out;
}

std::vector<TracePoint> ppi_trace(const MethodSetup& setup, std::size_t steps, std::uint64_t seed) {
  const UnitPool& pool = *setup.pool;
  const std::size_t n = pool.size();
  Rng rng(seed);
  const PredictionTable g = setup.predictor->predict(pool, LabeledSet(n));
  double g_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) g_total += g.at(i);
  const auto support = all_units(n);
  Proposal uniform = build_proposal(PredictionTable(std::vector<double>(n, 1.0)), support, setup.clamp);
  // Each draw contributes x = g_total - N (g - f); H_t is their plain mean.
  WeightedTrace trace;
  std::vector<TracePoint> out;
  out.reserve(steps);
  for (std::size_t t = 1; t <= steps; ++t) {
    const std::size_t unit = uniform.sample(rng).first;
    const double x = g_total - static_cast<double>(n) * (g.at(unit) - pool.truth(unit));
    out.push_back(trace.add(1.0, x));
  }
  return out;
}

}  // namespace

std::vector<TracePoint> dis_ais(const MethodSetup& setup, std::size_t steps, std::uint64_t seed) {
  return with_replacement(setup, true, true, method_predictor(Method::DIS_AIS, setup), steps, seed);
}

std::vector<TracePoint> run_method(Method m, const MethodSetup& setup, std::size_t steps,
                                   std::uint64_t seed) {
  if (!setup.pool || !setup.pool->simulation_mode())
    fail(ErrorCode::Unavailable, "simulated methods need a simulation-mode pool");
  if (is_wor(m)) {
    ActiveRun run = run_active_measurement(setup.pool, method_predictor(m, setup),
                                           wor_config(m, setup), steps, seed);
    std::vector<TracePoint> out;
    out.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const EstimateReport& r = run.history()[k];
      out.push_back({r.estimate, r.var_cond, r.var_simp, run.estimates()[k]});
    }
    return out;
  }
  switch (m) {
    case Method::MC:
      return with_replacement(setup, false, false, method_predictor(m, setup), steps, seed);
    case Method::DIS:
      return with_replacement(setup, false, false, method_predictor(m, setup), steps, seed);
    case Method::DIS_AIS:
      return dis_ais(setup, steps, seed);
    case Method::PPI:
      return ppi_trace(setup, steps, seed);
    default:
      break;
  }
  fail(ErrorCode::Config, "unsupported method");
}

}  // namespace am
