#include "estimator.hpp"

#include <cmath>
#include <cstdio>
#include <tuple>
#include <ostream>
#include <string>

#include "errors.hpp"
#include "numfmt.hpp"

namespace am {

double step_estimate(double partial, double f, double q) {
  if (!(q > 0.0)) fail(ErrorCode::Domain, "proposal probability must be > 0");
  if (!(f >= 0.0) || !(partial >= 0.0)) fail(ErrorCode::Domain, "values must be >= 0");
  return partial + f / q;
}

double combine(std::span<const double> estimates, std::span<const double> weights) {
  if (estimates.size() != weights.size()) fail(ErrorCode::Shape, "estimates and weights differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) sum += weights[i] * estimates[i];
  return sum;
}

ActiveRun::ActiveRun(std::shared_ptr<const UnitPool> pool,
                     std::shared_ptr<const Predictor> predictor, RunConfig config,
                     std::uint64_t seed, LabeledSet initial)
    : pool_(std::move(pool)), predictor_(std::move(predictor)), config_(config), rng_(seed) {
  if (!predictor_) fail(ErrorCode::Config, "a predictor is required");
  init(initial);
  table_ = predictor_->predict(*pool_, labeled_);
}

ActiveRun::ActiveRun(std::shared_ptr<const UnitPool> pool, PredictionTable predictions,
                     RunConfig config, std::uint64_t seed, LabeledSet initial)
    : pool_(std::move(pool)), config_(config), rng_(seed) {
  init(initial);
  push_predictions(std::move(predictions));
}

void ActiveRun::init(const LabeledSet& initial) {
  if (!pool_) fail(ErrorCode::Config, "a pool is required");
  z_for_level(config_.level);  // validates the level
  if (config_.plug_in == PlugInMean::Exact && !pool_->simulation_mode())
    fail(ErrorCode::Unavailable, "exact plug-in mean needs a simulation pool");
  labeled_ = LabeledSet(pool_->size());
  if (initial.pool_size() != 0 && initial.pool_size() != pool_->size())
    fail(ErrorCode::Shape, "initial labeled set belongs to a different pool");
  for (std::size_t k = 0; k < initial.size(); ++k) {
    const std::size_t unit = initial.units()[k];
    const double value = initial.values()[k];
    if (pool_->simulation_mode() && value != pool_->truth(unit))
      fail(ErrorCode::Label, "initial label of " + pool_->unit(unit).id + " disagrees with ground truth");
    labeled_.add(unit, value);
  }
  partial_ = partial_sum(*pool_, labeled_);
  for (std::size_t i = 0; i < pool_->size(); ++i)
    if (!labeled_.contains(i)) unlabeled_.push_back(i);
  n_eff_ = unlabeled_.size();
  if (n_eff_ == 0) fail(ErrorCode::Exhaustion, "every unit is already labeled");
}

void ActiveRun::push_predictions(PredictionTable table) {
  if (pending_) fail(ErrorCode::Conflict, "cannot change predictions while a sample is pending");
  if (table.size() != pool_->size()) fail(ErrorCode::Shape, "prediction table does not match the pool");
  for (std::size_t i : unlabeled_)
    if (!table.has(i))
      fail(ErrorCode::Coverage, "missing prediction for unlabeled unit " + pool_->unit(i).id);
  table_ = std::move(table);
  weights_cache_.reset();
}

const ActiveRun::Draw& ActiveRun::draw() {
  if (pending_) return *pending_;
  if (exhausted()) fail(ErrorCode::Exhaustion, "all units have been labeled");
  if (!weights_cache_) weights_cache_ = clamped_weights(table_, unlabeled_, config_.clamp);
  Proposal proposal = build_proposal(weights_cache_, unlabeled_);
  auto [unit, q] = proposal.sample(rng_);
  trajectory_.add_proposal(proposal.snapshot());
  pending_ = Draw{unit, q};
  return *pending_;
}

double ActiveRun::plug_in_source(std::size_t t) const {
  // t >= 2 here: the combined estimate of step t - 1 exists.
  switch (config_.plug_in) {
    case PlugInMean::OwnScheme:
      return combined_[t - 2];
    case PlugInMean::Lure: {
      auto w = normalize(lure_weights(t - 1, n_eff_));
      return combine(std::span<const double>(estimates_).first(t - 1), w);
    }
    case PlugInMean::Exact:
      return total_true(*pool_);
  }
  return combined_[t - 2];
}

EstimateReport ActiveRun::observe(std::size_t unit, double value) {
  if (!pending_) fail(ErrorCode::Conflict, "no sample is pending");
  if (pending_->unit != unit)
    fail(ErrorCode::Conflict, "label is for " + pool_->unit(unit).id + " but the pending unit is " +
                                  pool_->unit(pending_->unit).id);
  return observe(value);
}

EstimateReport ActiveRun::observe(double value) {
  if (!pending_) fail(ErrorCode::Conflict, "no sample is pending");
  if (!std::isfinite(value) || value < 0.0) fail(ErrorCode::Label, "labels must be finite and >= 0");
  const Draw d = *pending_;
  const std::size_t t = trajectory_.steps() + 1;

  StepRecord rec;
  rec.tau = t;
  rec.unit = d.unit;
  rec.f_value = value;
  rec.q = d.q;
  rec.partial_before = partial_;
  rec.estimate = step_estimate(partial_, value, d.q);
  trajectory_.add_step(rec);
  estimates_.push_back(rec.estimate);

  EstimateReport rep;
  rep.t = t;
  rep.level = config_.level;
  rep.caveat = config_.scheme.kind == SchemeKind::Inv;

  if (t < n_eff_) {
    std::vector<double> q_hist(t);
    for (std::size_t tau = 1; tau <= t; ++tau) q_hist[tau - 1] = trajectory_.q(tau, d.unit);
    const double source = t == 1 ? (config_.plug_in == PlugInMean::Exact ? total_true(*pool_)
                                                                        : rec.estimate)
                                 : plug_in_source(t);
    accumulator_.update(rec, q_hist, lure_weight(t, n_eff_), source);
    SchemeWeights sw = scheme_weights(config_.scheme, t, n_eff_, accumulator_.var_hats());
    if (sw.fallback) ++inv_fallbacks_;
    weights_ = std::move(sw.normalized);
    rep.estimate = combine(estimates_, weights_);
    const double raw = var_combined_raw(weights_, accumulator_.var_hats());
    if (raw < 0.0) ++floor_events_;
    rep.var_cond = raw > 0.0 ? raw : 0.0;
    rep.var_simp = var_simple(weights_, estimates_, rep.estimate);
  } else {
    // Last unit: q = 1, so F_hat_t is exact and carries all the weight.
    weights_.assign(t, 0.0);
    weights_.back() = 1.0;
    rep.estimate = rec.estimate;
    rep.var_cond = 0.0;
    rep.var_simp = 0.0;
  }
  std::tie(rep.ci_lo, rep.ci_hi) = confidence_interval(rep.estimate, rep.var_cond, config_.level);

  combined_.push_back(rep.estimate);
  labeled_.add(d.unit, value);
  partial_ += value;
  std::erase(unlabeled_, d.unit);
  pending_.reset();
  history_.push_back(rep);

  if (predictor_ && config_.retrain_every > 0 && t % config_.retrain_every == 0 && !exhausted()) {
    table_ = predictor_->predict(*pool_, labeled_);
    weights_cache_.reset();
  }
  return rep;
}

EstimateReport ActiveRun::step() {
  const Draw& d = draw();
  return observe(pool_->truth(d.unit));
}

EstimateReport ActiveRun::report() const {
  if (history_.empty()) fail(ErrorCode::NoEstimate, "no steps have been taken yet");
  return history_.back();
}

ActiveRun run_active_measurement(std::shared_ptr<const UnitPool> pool,
                                 std::shared_ptr<const Predictor> predictor, RunConfig config,
                                 std::size_t steps, std::uint64_t seed, LabeledSet initial) {
  ActiveRun run(std::move(pool), std::move(predictor), config, seed, std::move(initial));
  if (steps > run.n_eff())
    fail(ErrorCode::Exhaustion, "requested " + std::to_string(steps) + " steps but only " +
                                    std::to_string(run.n_eff()) + " units are unlabeled");
  for (std::size_t i = 0; i < steps; ++i) run.step();
  return run;
}

ActiveRun run_active_measurement(std::shared_ptr<const UnitPool> pool,
                                 std::shared_ptr<const Predictor> predictor, RunConfig config,
                                 std::size_t steps, std::uint64_t seed, const LabelCallback& label,
                                 LabeledSet initial) {
  ActiveRun run(std::move(pool), std::move(predictor), config, seed, std::move(initial));
  if (steps > run.n_eff())
    fail(ErrorCode::Exhaustion, "requested " + std::to_string(steps) + " steps but only " +
                                    std::to_string(run.n_eff()) + " units are unlabeled");
  for (std::size_t i = 0; i < steps; ++i) {
    const ActiveRun::Draw& d = run.draw();
    run.observe(label(run.pool().unit(d.unit), d.q));
  }
  return run;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out + "\"";
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const ActiveRun& run) {
  out << "tau,unit,f,q,estimate,combined,var_cond,var_simp\n";
  const auto& hist = run.history();
  for (const StepRecord& s : run.trajectory().records()) {
    const EstimateReport& r = hist[s.tau - 1];
    out << s.tau << ',' << csv_field(run.pool().unit(s.unit).id) << ',' << format_double(s.f_value)
        << ',' << format_double(s.q) << ',' << format_double(s.estimate) << ','
        << format_double(r.estimate) << ',' << format_double(r.var_cond) << ','
        << format_double(r.var_simp) << '\n';
  }
}

void write_trajectory_jsonl(std::ostream& out, const ActiveRun& run) {
  const auto& hist = run.history();
  for (const StepRecord& s : run.trajectory().records()) {
    const EstimateReport& r = hist[s.tau - 1];
    out << "{\"tau\":" << s.tau << ",\"unit\":" << json_string(run.pool().unit(s.unit).id)
        << ",\"f\":" << format_double(s.f_value) << ",\"q\":" << format_double(s.q)
        << ",\"estimate\":" << format_double(s.estimate)
        << ",\"combined\":" << format_double(r.estimate)
        << ",\"var_cond\":" << format_double(r.var_cond)
        << ",\"var_simp\":" << format_double(r.var_simp) << "}\n";
  }
}

}  // namespace am
