#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "errors.hpp"
#include "numfmt.hpp"

namespace am {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  const double n = static_cast<double>(xs.size());
  out.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::size_t trials_or(const CheckOptions& opt, std::size_t fallback) {
  return opt.trials > 0 ? opt.trials : fallback;
}

ExperimentConfig with(ExperimentConfig cfg, const CheckOptions& opt, std::size_t trials) {
  cfg.trials = trials;
  cfg.seed = opt.seed;
  cfg.threads = opt.threads;
  return cfg;
}

std::vector<double> fractional_errors(const TrialMatrix& m, std::size_t g, double truth) {
  std::vector<double> out = m.column(m.estimate, g);
  for (double& e : out) e = std::abs(e - truth) / truth;
  return out;
}

std::size_t frac_step(double frac, std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frac * static_cast<double>(n))));
}

}  // namespace

ExperimentConfig standard_config() {
  ExperimentConfig cfg;
  cfg.pool.kind = "clustered";
  cfg.pool.n = 50;
  cfg.pool.seed = 7;
  cfg.pool.bumps = 3;
  cfg.pool.spread = 1.5;
  cfg.pool.mass = 200.0;
  cfg.pool.background = 1.0;
  cfg.predictor.kind = "noisy";
  cfg.predictor.bias = 1.0;
  cfg.predictor.sigma = 0.5;
  cfg.predictor.seed = 13;
  cfg.clamp = ClampPolicy(ClampPolicy::Mode::Floor, 1.0);
  return cfg;
}

ExperimentConfig ordering_config() {
  ExperimentConfig cfg = standard_config();
  cfg.pool.n = 200;
  cfg.pool.seed = 11;
  cfg.pool.bumps = 4;
  cfg.pool.spread = 1.5;
  cfg.pool.mass = 400.0;
  cfg.predictor.kind = "improving";
  cfg.predictor.sigma0 = 1.0;
  cfg.predictor.decay = 1.0;
  return cfg;
}

CheckResult check_unbiased(const CheckOptions& opt) {
  CheckResult res{"unbiasedness", true, {}};
  ExperimentConfig cfg = with(standard_config(), opt, trials_or(opt, 20000));
  cfg.t_grid = {10, 25, 40};
  auto pool = make_pool(cfg.pool);
  const double truth = total_true(*pool);
  double worst = 0.0;
  std::string worst_at;
  for (WeightScheme scheme : {WeightScheme::sqrt(), WeightScheme::lure(), WeightScheme::comb()}) {
    cfg.scheme = scheme;
    const TrialMatrix m = collect_trials(cfg, pool);
    for (std::size_t g = 0; g < m.grid.size(); ++g) {
      const MeanSe s = mean_se(m.column(m.estimate, g));
      const double z = s.se > 0.0 ? std::abs(s.mean - truth) / s.se : (s.mean == truth ? 0.0 : INFINITY);
      if (z > worst) {
        worst = z;
        worst_at = scheme.name() + " t=" + std::to_string(m.grid[g]);
      }
      if (z > 3.0) res.passed = false;
    }
  }
  res.detail = "M=" + std::to_string(cfg.trials) + " F=" + num(truth) + " max |mean-F|/SE=" +
               num(worst) + " (" + worst_at + "), limit 3";
  return res;
}

CheckResult check_zero_covariance(const CheckOptions& opt) {
  CheckResult res{"zero covariance", false, {}};
  ExperimentConfig cfg = with(standard_config(), opt, trials_or(opt, 20000));
  cfg.t_grid = {5, 20};
  auto pool = make_pool(cfg.pool);
  const TrialMatrix m = collect_trials(cfg, pool);
  const auto x = m.column(m.base, 0);
  const auto y = m.column(m.base, 1);
  const double mx = mean_se(x).mean;
  const double my = mean_se(y).mean;
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
  const MeanSe p = mean_se(prod);
  const double n = static_cast<double>(x.size());
  const double cov = p.mean * n / (n - 1.0);
  res.passed = std::abs(cov) <= 3.0 * p.se;
  res.detail = "M=" + std::to_string(cfg.trials) + " Cov(F5,F20)=" + num(cov) + " SE=" + num(p.se) +
               " ratio=" + num(p.se > 0.0 ? std::abs(cov) / p.se : 0.0) + ", limit 3";
  return res;
}

CheckResult check_oracle(const CheckOptions& opt) {
  CheckResult res{"zero-variance oracle", true, {}};
  ExperimentConfig cfg = standard_config();
  auto pool = make_pool(cfg.pool);
  const double truth = total_true(*pool);
  auto oracle = std::make_shared<OraclePredictor>();
  const std::size_t trials = trials_or(opt, 200);
  double worst = 0.0;
  for (WeightScheme scheme : {WeightScheme::sqrt(), WeightScheme::lure(), WeightScheme::comb(),
                              WeightScheme::inv(0.5)}) {
    RunConfig rc;
    rc.scheme = scheme;
    rc.clamp = cfg.clamp;
    for (std::size_t m = 0; m < trials; ++m) {
      ActiveRun run(pool, oracle, rc, derive_seed(opt.seed, m));
      while (!run.exhausted()) {
        const double err = std::abs(run.step().estimate - truth) / truth;
        worst = std::max(worst, err);
      }
    }
  }
  res.passed = worst <= 1e-9;
  res.detail = std::to_string(trials) + " runs x 4 schemes, every t; max relative error " + num(worst) +
               ", limit 1e-9";
  return res;
}

CheckResult check_exhaustion(const CheckOptions& opt) {
  CheckResult res{"exhaustion exactness", true, {}};
  ExperimentConfig cfg = standard_config();
  auto pool = make_pool(cfg.pool);
  const double truth = total_true(*pool);
  const std::size_t trials = trials_or(opt, 100);
  double worst = 0.0;
  std::string worst_at = "-";
  const auto check = [&](Method m, const ExperimentConfig& c, const std::string& label) {
    const MethodSetup setup = make_setup(c, pool);
    for (std::size_t k = 0; k < trials; ++k) {
      auto trace = run_method(m, setup, pool->size(), derive_seed(opt.seed, k));
      const double err = std::abs(trace.back().estimate - truth) / truth;
      if (err > worst) worst = err, worst_at = label;
    }
  };
  for (WeightScheme scheme : {WeightScheme::sqrt(), WeightScheme::lure(), WeightScheme::comb(),
                              WeightScheme::inv(0.5)}) {
    ExperimentConfig c = cfg;
    c.scheme = scheme;
    check(Method::Active, c, "active/" + scheme.name());
  }
  for (Method m : {Method::MC_WOR, Method::DIS_WOR, Method::ActiveTesting}) check(m, cfg, method_name(m));
  res.passed = worst <= 1e-9;
  res.detail = std::to_string(trials) + " runs per method at t=N; max relative error " + num(worst) +
               " (" + worst_at + "), limit 1e-9";
  return res;
}

CheckResult check_streaming(const CheckOptions& opt) {
  CheckResult res{"streaming equivalence", true, {}};
  const std::size_t runs = trials_or(opt, 200);
  double worst = 0.0;
  std::size_t compared = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    Rng rng(derive_seed(opt.seed, r));
    const std::size_t n = 3 + rng.next() % 58;
    std::vector<Unit> units;
    for (std::size_t i = 0; i < n; ++i) {
      double v = rng.uniform() < 0.2 ? 0.0 : std::floor(rng.uniform() * 60.0);
      units.push_back({"s" + std::to_string(i), "", v});
    }
    auto pool = std::make_shared<const UnitPool>(std::move(units));
    std::shared_ptr<const Predictor> predictor;
    if (rng.uniform() < 0.5)
      predictor = std::make_shared<NoisyPredictor>(*pool, 0.5 + 1.5 * rng.uniform(), 1.5 * rng.uniform(),
                                                   rng.next());
    else
      predictor = std::make_shared<ImprovingPredictor>(*pool, 0.5 + 1.5 * rng.uniform(),
                                                       1.5 * rng.uniform(), rng.uniform(), rng.next());
    RunConfig rc;
    const WeightScheme schemes[] = {WeightScheme::sqrt(), WeightScheme::lure(), WeightScheme::comb(),
                                    WeightScheme::inv(0.1 + 0.8 * rng.uniform())};
    rc.scheme = schemes[rng.next() % 4];
    const PlugInMean modes[] = {PlugInMean::OwnScheme, PlugInMean::Lure, PlugInMean::Exact};
    rc.plug_in = modes[rng.next() % 3];
    rc.clamp = ClampPolicy(rng.uniform() < 0.5 ? ClampPolicy::Mode::Floor : ClampPolicy::Mode::Offset,
                           0.5 + 1.5 * rng.uniform());
    rc.retrain_every = rng.next() % 4;
    LabeledSet initial(n);
    const std::size_t seeded = rng.next() % (n / 3 + 1);
    for (std::size_t i = 0; i < seeded; ++i) {
      const std::size_t u = rng.next() % n;
      if (!initial.contains(u)) initial.add(u, pool->truth(u));
    }
    ActiveRun run(pool, predictor, rc, rng.next(), initial);
    const double truth = total_true(*pool);
    const std::size_t n_eff = run.n_eff();
    for (std::size_t t = 1; t < n_eff; ++t) {
      run.step();
      double source = 0.0;
      if (rc.plug_in == PlugInMean::Exact) source = truth;
      else if (t == 1) source = run.estimates()[0];
      else if (rc.plug_in == PlugInMean::OwnScheme) source = run.history()[t - 2].estimate;
      else source = combine(run.estimates().first(t - 1), normalize(lure_weights(t - 1, n_eff)));
      const auto naive = var_taus_naive(run.trajectory(), t, source, n_eff);
      const auto streamed = run.var_hats();
      // An exactly zero target is judged against the resolution of the inputs.
      double scale = source * source;
      for (double e : run.estimates()) scale = std::max(scale, e * e);
      const double floor = std::max(1e-16 * scale, std::numeric_limits<double>::min());
      for (std::size_t k = 0; k < t; ++k) {
        const double denom = std::max(std::abs(naive[k]), floor);
        const double err = std::abs(streamed[k] - naive[k]) / denom;
        worst = std::max(worst, err);
        ++compared;
      }
    }
  }
  res.passed = worst <= 1e-8;
  res.detail = std::to_string(runs) + " runs, " + std::to_string(compared) +
               " per-tau values; max relative difference " + num(worst) + ", limit 1e-8";
  return res;
}

CheckResult check_streaming_slope(const CheckOptions& opt) {
  using clock = std::chrono::steady_clock;
  CheckResult res{"streaming O(t) cost", false, {}};
  const std::size_t sizes[] = {100, 1000, 10000};
  std::vector<double> xs, ys;
  Rng rng(opt.seed);
  std::string detail;
  for (std::size_t t0 : sizes) {
    VarianceAccumulator acc;
    std::vector<double> q_hist;
    StepRecord rec;
    const auto feed = [&](VarianceAccumulator& a, std::size_t t) {
      q_hist.resize(t);
      for (double& q : q_hist) q = 0.001 + rng.uniform() * 0.01;
      rec.tau = t;
      rec.f_value = std::floor(rng.uniform() * 10.0);
      rec.q = q_hist.back();
      rec.partial_before = static_cast<double>(t);
      a.update(rec, q_hist, 1.0 / static_cast<double>(t), 100.0 + static_cast<double>(t));
    };
    for (std::size_t t = 1; t <= t0; ++t) feed(acc, t);
    constexpr std::size_t batch = 8;
    const std::size_t reps = std::max<std::size_t>(5, 400000 / (t0 * batch));
    std::vector<double> per_step;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      VarianceAccumulator copy = acc;
      const auto start = clock::now();
      for (std::size_t k = 1; k <= batch; ++k) feed(copy, t0 + k);
      const std::chrono::duration<double> dt = clock::now() - start;
      per_step.push_back(dt.count() / batch);
    }
    std::nth_element(per_step.begin(), per_step.begin() + per_step.size() / 2, per_step.end());
    const double median = per_step[per_step.size() / 2];
    xs.push_back(std::log(static_cast<double>(t0)));
    ys.push_back(std::log(median));
    detail += "t=" + std::to_string(t0) + ": " + num(median * 1e6) + "us/step; ";
  }
  const double mx = (xs[0] + xs[1] + xs[2]) / 3.0;
  const double my = (ys[0] + ys[1] + ys[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  res.passed = slope <= 1.3;
  res.detail = detail + "fitted exponent " + num(slope) + ", limit 1.3";
  return res;
}

CheckResult check_bound(const CheckOptions&) {
  CheckResult res{"9/8 bound", true, {}};
  constexpr double limit = 1.125 + 1e-9;
  double worst_fixed = 0.0;
  std::string at_fixed;
  for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
    const std::size_t t_max = std::min<std::size_t>(n - 1, 5000);
    const auto lure = lure_weights(t_max, n);
    const std::vector<double> flat(t_max, 1.0);
    for (std::size_t t = 1; t <= t_max; ++t) {
      for (const auto* w : {&lure, &flat}) {
        const double r = worst_case_ratio(*w, t);
        if (r > worst_fixed) {
          worst_fixed = r;
          at_fixed = std::string(w == &lure ? "lure" : "uniform") + " N=" + std::to_string(n) +
                     " t=" + std::to_string(t);
        }
      }
    }
  }
  double worst_model = 0.0;
  std::string at_model;
  for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
    VarianceModelConfig vm;
    vm.n = n;
    vm.t_max = 2000;
    vm.schemes = {WeightScheme::comb()};
    for (const RatioRow& row : variance_model_compare(vm)) {
      if (row.ratio > worst_model) {
        worst_model = row.ratio;
        at_model = "N=" + std::to_string(n) + " y=" + num(row.y) + " t=" + std::to_string(row.t);
      }
    }
  }
  res.passed = worst_fixed <= limit && worst_model <= limit;
  res.detail = "max worst_case_ratio " + format_double(worst_fixed) + " (" + at_fixed +
               "); max COMB model ratio " + format_double(worst_model) + " (" + at_model +
               "), limit 1.125";
  return res;
}

std::vector<CheckResult> check_weighting_order(const CheckOptions& opt) {
  ExperimentConfig cfg = with(ordering_config(), opt, trials_or(opt, 10000));
  auto pool = make_pool(cfg.pool);
  const double truth = total_true(*pool);
  const std::size_t n = pool->size();
  const std::size_t t05 = frac_step(0.05, n), t10 = frac_step(0.10, n), t50 = frac_step(0.5, n),
                    t70 = frac_step(0.7, n);
  cfg.t_grid = {t05, t10, t50, t70};
  const auto errors_for = [&](WeightScheme scheme) {
    ExperimentConfig c = cfg;
    c.scheme = scheme;
    const TrialMatrix m = collect_trials(c, pool);
    std::vector<std::vector<double>> out;
    for (std::size_t g = 0; g < m.grid.size(); ++g) out.push_back(fractional_errors(m, g, truth));
    return out;
  };
  const auto comb = errors_for(WeightScheme::comb());
  const auto lure = errors_for(WeightScheme::lure());
  const auto sqrt = errors_for(WeightScheme::sqrt());
  const auto inv5 = errors_for(WeightScheme::inv(0.5));
  const auto inv9 = errors_for(WeightScheme::inv(0.9));
  const auto index = [&](std::size_t t) {
    return static_cast<std::size_t>(std::find(cfg.t_grid.begin(), cfg.t_grid.end(), t) - cfg.t_grid.begin());
  };
  // Sampling does not depend on the weights, so the schemes share trajectories
  // per seed and the comparisons use paired differences.
  const auto paired = [&](const std::string& name, const std::vector<double>& worse,
                          const std::vector<double>& better, std::size_t t) {
    std::vector<double> d(worse.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = worse[i] - better[i];
    const MeanSe diff = mean_se(d);
    const double a = mean_se(worse).mean, b = mean_se(better).mean;
    CheckResult r{name, diff.mean >= 2.0 * diff.se, {}};
    r.detail = "t=" + std::to_string(t) + " ratio " + num(a / b) + " (" + num(a) + " vs " + num(b) +
               "), paired diff " + num(diff.mean) + " = " + num(diff.se > 0 ? diff.mean / diff.se : 0.0) +
               " SE, need >= 2";
    return r;
  };
  std::vector<CheckResult> out;
  out.push_back(paired("weighting LURE/COMB >= 1 at t/N=0.05", lure[index(t05)], comb[index(t05)], t05));
  out.push_back(paired("weighting SQRT/COMB >= 1 at t/N=0.7", sqrt[index(t70)], comb[index(t70)], t70));
  {
    const double a = mean_se(inv5[index(t50)]).mean, b = mean_se(comb[index(t50)]).mean;
    CheckResult r{"weighting INV(0.5) <= 1.05 COMB at t/N=0.5", a <= 1.05 * b, {}};
    r.detail = "t=" + std::to_string(t50) + " ratio " + num(a / b) + " (" + num(a) + " vs " + num(b) +
               "), limit 1.05";
    out.push_back(r);
  }
  out.push_back(paired("weighting INV(0.9) >= INV(0.5) at t/N=0.1", inv9[index(t10)], inv5[index(t10)], t10));
  for (CheckResult& r : out) r.detail = "M=" + std::to_string(cfg.trials) + " " + r.detail;
  return out;
}

CheckResult check_coverage(const CheckOptions& opt) {
  CheckResult res{"coverage", true, {}};
  ExperimentConfig cfg = with(standard_config(), opt, trials_or(opt, 5000));
  cfg.t_fracs = {0.3, 0.5, 0.7, 0.9};
  auto pool = make_pool(cfg.pool);
  const double truth = total_true(*pool);
  const TrialMatrix m = collect_trials(cfg, pool);
  std::string detail = "M=" + std::to_string(cfg.trials) + ";";
  for (std::size_t g = 0; g < m.grid.size(); ++g) {
    const auto est = m.column(m.estimate, g);
    const double cond = coverage(est, m.column(m.var_cond, g), truth, cfg.level);
    const double simp = coverage(est, m.column(m.var_simp, g), truth, cfg.level);
    if (cond < 0.90 || cond > 0.98 || simp < 0.90 || simp > 0.98) res.passed = false;
    detail += " t=" + std::to_string(m.grid[g]) + " cond " + num(cond) + " simp " + num(simp) + ";";
  }
  res.detail = detail + " band [0.90, 0.98]";
  return res;
}

std::vector<CheckResult> check_baseline_order(const CheckOptions& opt) {
  ExperimentConfig cfg = with(ordering_config(), opt, trials_or(opt, 10000));
  auto pool = make_pool(cfg.pool);
  const double truth = total_true(*pool);
  const std::size_t t = frac_step(0.3, pool->size());
  cfg.t_grid = {t};
  const auto errors_for = [&](Method m) {
    ExperimentConfig c = cfg;
    c.method = m;
    const TrialMatrix mat = collect_trials(c, pool);
    return mean_se(fractional_errors(mat, 0, truth));
  };
  const MeanSe active = errors_for(Method::Active);
  std::vector<CheckResult> out;
  for (Method m : {Method::DIS, Method::DIS_AIS, Method::DIS_WOR, Method::MC, Method::MC_WOR,
                   Method::ActiveTesting, Method::PPI}) {
    const MeanSe other = errors_for(m);
    const double se = std::sqrt(active.se * active.se + other.se * other.se);
    CheckResult r{"baseline active <= " + method_name(m) + " at t/N=0.3",
                  other.mean - active.mean >= 2.0 * se, {}};
    r.detail = "M=" + std::to_string(cfg.trials) + " t=" + std::to_string(t) + " active " +
               num(active.mean) + " vs " + num(other.mean) + ", gap " +
               num(se > 0 ? (other.mean - active.mean) / se : 0.0) + " SE, need >= 2";
    out.push_back(r);
  }
  return out;
}

std::vector<std::string> suite_names() {
  return {"bound", "unbiased", "streaming", "coverage", "ordering", "all"};
}

std::vector<CheckResult> run_suite(const std::string& suite, const CheckOptions& opt) {
  std::vector<CheckResult> out;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "bound") {
    known = true;
    out.push_back(check_bound(opt));
  }
  if (all || suite == "unbiased") {
    known = true;
    out.push_back(check_unbiased(opt));
    out.push_back(check_zero_covariance(opt));
    out.push_back(check_oracle(opt));
    out.push_back(check_exhaustion(opt));
  }
  if (all || suite == "streaming") {
    known = true;
    out.push_back(check_streaming(opt));
    out.push_back(check_streaming_slope(opt));
  }
  if (all || suite == "coverage") {
    known = true;
    out.push_back(check_coverage(opt));
  }
  if (all || suite == "ordering") {
    known = true;
    for (auto& r : check_weighting_order(opt)) out.push_back(std::move(r));
    for (auto& r : check_baseline_order(opt)) out.push_back(std::move(r));
  }
  if (!known) fail(ErrorCode::Config, "unknown verify suite: " + suite);
  return out;
}

std::string format_results(const std::vector<CheckResult>& results) {
  std::ostringstream o;
  for (const CheckResult& r : results)
    o << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
  return o.str();
}

}  // namespace am
