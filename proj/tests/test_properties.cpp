#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "estimator.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace am;

namespace {

struct Case {
  std::shared_ptr<const UnitPool> pool;
  std::shared_ptr<const Predictor> predictor;
  RunConfig config;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

// Random pool, predictor, scheme, clamp and run length.
Case random_case(Rng& rng) {
  Case c;
  const std::size_t n = 2 + rng.next() % 39;
  std::vector<double> v(n);
  const bool sparse = rng.uniform() < 0.3;
  for (auto& x : v) x = sparse && rng.uniform() < 0.6 ? 0.0 : std::floor(rng.uniform() * 30.0);
  if (std::accumulate(v.begin(), v.end(), 0.0) == 0.0) v[0] = 1.0;
  c.pool = testing::sim_pool(v);
  switch (rng.next() % 4) {
    case 0: c.predictor = std::make_shared<const OraclePredictor>(); break;
    case 1: c.predictor = std::make_shared<const UniformPredictor>(); break;
    case 2: c.predictor = std::make_shared<const NoisyPredictor>(*c.pool, 0.5 + rng.uniform(), rng.uniform() * 1.5, rng.next()); break;
    default: c.predictor = std::make_shared<const ImprovingPredictor>(*c.pool, 1.0, 1.0 + rng.uniform(), rng.uniform() * 2.0, rng.next());
  }
  const SchemeKind kinds[] = {SchemeKind::Sqrt, SchemeKind::Lure, SchemeKind::Comb, SchemeKind::Inv};
  c.config.scheme = {kinds[rng.next() % 4], 0.1 + 0.8 * rng.uniform()};
  c.config.clamp = rng.uniform() < 0.5 ? ClampPolicy(ClampPolicy::Mode::Floor, 0.1 + rng.uniform())
                                       : ClampPolicy(ClampPolicy::Mode::Offset, 0.1 + rng.uniform());
  c.config.retrain_every = rng.next() % 3;
  c.steps = 1 + rng.next() % n;
  c.seed = rng.next();
  return c;
}

}  // namespace

TEST_CASE("report invariants over random runs") {
  Rng rng(1234);
  for (int k = 0; k < 300; ++k) {
    Case c = random_case(rng);
    ActiveRun run(c.pool, c.predictor, c.config, c.seed);
    for (std::size_t t = 1; t <= c.steps; ++t) {
      const EstimateReport r = run.step();
      CHECK(r.t == t);
      CHECK(r.var_cond >= 0.0);
      CHECK(r.var_simp >= 0.0);
      CHECK(r.ci_lo <= r.estimate);
      CHECK(r.estimate <= r.ci_hi);
      CHECK(r.caveat == (c.config.scheme.kind == SchemeKind::Inv));
      double mass = 0.0;
      for (double w : run.weights()) {
        CHECK(w >= 0.0);
        mass += w;
      }
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
    if (c.steps == c.pool->size()) CHECK(run.report().estimate == total_true(*c.pool));
  }
}

TEST_CASE("sampled units are distinct and q matches the proposal") {
  Rng rng(77);
  for (int k = 0; k < 100; ++k) {
    Case c = random_case(rng);
    ActiveRun run(c.pool, c.predictor, c.config, c.seed);
    std::vector<char> seen(c.pool->size(), 0);
    for (std::size_t t = 1; t <= c.steps; ++t) {
      run.step();
      const StepRecord& s = run.trajectory().step(t);
      CHECK_FALSE(seen[s.unit]);
      seen[s.unit] = 1;
      CHECK(s.q == run.trajectory().q(t, s.unit));
      CHECK(s.q > 0.0);
      CHECK(s.q <= 1.0);
    }
  }
}

TEST_CASE("streaming equals direct sums over random runs") {
  Rng rng(555);
  double worst = 0.0;
  for (int k = 0; k < 150; ++k) {
    Case c = random_case(rng);
    if (c.pool->size() < 3) continue;
    c.steps = std::min(c.steps, c.pool->size() - 1);
    ActiveRun run(c.pool, c.predictor, c.config, c.seed);
    for (std::size_t t = 1; t <= c.steps; ++t) {
      run.step();
      const double source = t == 1 ? run.estimates()[0] : run.history()[t - 2].estimate;
      auto naive = var_taus_naive(run.trajectory(), t, source, run.n_eff());
      const double scale = oracle::input_scale(run, source);
      for (std::size_t i = 0; i < t; ++i)
        worst = std::max(worst, oracle::streaming_error(run.var_hats()[i], naive[i], scale));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("per-step estimates are unbiased on enumerable pools") {
  // Exact expectation of F_hat_t over all paths with fixed proposals.
  Rng rng(91);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 3 + rng.next() % 3;
    std::vector<double> f(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = std::floor(rng.uniform() * 9.0);
      g[i] = 0.2 + rng.uniform() * 3.0;
    }
    const double total = std::accumulate(f.begin(), f.end(), 0.0);
    std::vector<double> expect(n, 0.0);
    std::function<void(std::vector<std::size_t>&, double)> walk = [&](std::vector<std::size_t>& path, double p) {
      if (!path.empty()) {
        am::Trajectory tr = oracle::forced_trajectory(f, g, path);
        expect[path.size() - 1] += p * tr.step(path.size()).estimate;
      }
      if (path.size() == n) return;
      const auto q = oracle::fixed_q(g, path);
      for (std::size_t s = 0; s < n; ++s) {
        if (q[s] <= 0.0) continue;
        path.push_back(s);
        walk(path, p * q[s]);
        path.pop_back();
      }
    };
    std::vector<std::size_t> path;
    walk(path, 1.0);
    for (double e : expect) CHECK(e == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("variance estimator unbiasedness on random enumerable pools") {
  auto res = oracle::variance_unbiasedness_sweep(4321, 2);
  CHECK(res.cases > 0);
  CHECK(res.max_rel <= 1e-10);
}

TEST_CASE("normalization is scale invariant") {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> w(1 + rng.next() % 20), scaled;
    for (auto& x : w) x = rng.uniform() + 1e-3;
    const double c = std::exp(rng.uniform() * 20 - 10);
    for (double x : w) scaled.push_back(c * x);
    auto a = normalize(w), b = normalize(scaled);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}
