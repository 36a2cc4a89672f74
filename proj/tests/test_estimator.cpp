#include <doctest.h>

#include <cmath>
#include <sstream>

#include "estimator.hpp"
#include "test_support.hpp"

using namespace am;

namespace {

RunConfig with_scheme(WeightScheme s) {
  RunConfig c;
  c.scheme = s;
  return c;
}

std::shared_ptr<const Predictor> noisy(const UnitPool& pool, std::uint64_t seed = 3) {
  return std::make_shared<const NoisyPredictor>(pool, 1.0, 0.6, seed);
}

}  // namespace

TEST_CASE("per-step estimate") {
  CHECK(step_estimate(0, 2, 1) == 2.0);
  CHECK(step_estimate(3, 2, 0.25) == 11.0);
  CHECK_CODE(step_estimate(0, 1, 0), ErrorCode::Domain);
  CHECK_CODE(step_estimate(0, -1, 0.5), ErrorCode::Domain);
}

TEST_CASE("combination") {
  CHECK(combine(std::vector<double>{5}, std::vector<double>{1}) == 5.0);
  CHECK(combine(std::vector<double>{4, 8}, std::vector<double>{0.5, 0.5}) == 6.0);
  CHECK(combine(std::vector<double>{7, 7, 7}, std::vector<double>{0.2, 0.3, 0.5}) == doctest::Approx(7.0));
  CHECK_CODE(combine(std::vector<double>{1, 2}, std::vector<double>{1}), ErrorCode::Shape);
}

TEST_CASE("single-step expectation enumerates to the total") {
  // f = [1,2,3], q = [0.2, 0.3, 0.5]: sum_s q(s) f(s)/q(s) = 6.
  const double f[] = {1, 2, 3}, q[] = {0.2, 0.3, 0.5};
  double e = 0.0;
  for (int s = 0; s < 3; ++s) e += q[s] * step_estimate(0, f[s], q[s]);
  CHECK(e == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("exhaustion recovers the total for every scheme") {
  auto pool = testing::sim_pool({3, 0, 7, 1, 12, 5, 2});
  for (auto s : {WeightScheme::sqrt(), WeightScheme::lure(), WeightScheme::comb(), WeightScheme::inv(0.5)}) {
    ActiveRun run = run_active_measurement(pool, noisy(*pool), with_scheme(s), pool->size(), 11);
    EstimateReport r = run.report();
    CHECK(r.estimate == 30.0);
    CHECK(r.var_cond == 0.0);
    CHECK(r.ci_lo == r.ci_hi);
    CHECK(run.exhausted());
  }
}

TEST_CASE("oracle predictions are exact at every step") {
  auto pool = testing::sim_pool({3, 1, 7, 1, 12, 5, 2, 9});
  auto oracle = std::make_shared<const OraclePredictor>();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ActiveRun run = run_active_measurement(pool, oracle, RunConfig{}, pool->size() - 1, seed);
    for (double e : run.estimates()) CHECK(std::fabs(e - 40.0) / 40.0 <= 1e-9);
    for (const auto& r : run.history()) CHECK(std::fabs(r.estimate - 40.0) / 40.0 <= 1e-9);
  }
}

TEST_CASE("first report has a degenerate interval") {
  auto pool = testing::sim_pool({4, 6});
  ActiveRun run(pool, std::make_shared<const OraclePredictor>(), RunConfig{}, 1);
  CHECK_CODE(run.report(), ErrorCode::NoEstimate);
  EstimateReport r = run.step();
  CHECK(r.t == 1);
  CHECK(r.estimate == doctest::Approx(10.0));
  CHECK(r.var_cond == 0.0);
  CHECK(r.ci_lo == r.estimate);
  CHECK(r.ci_hi == r.estimate);
}

TEST_CASE("report agrees with the module operations") {
  auto pool = testing::sim_pool({3, 0, 7, 1, 12, 5, 2, 8, 4, 4, 6, 1});
  ActiveRun run(pool, noisy(*pool), RunConfig{}, 17);
  for (int k = 0; k < 8; ++k) {
    EstimateReport r = run.step();
    CHECK(r.estimate == doctest::Approx(combine(run.estimates(), run.weights())).epsilon(1e-14));
    CHECK(r.var_cond == doctest::Approx(var_combined(run.weights(), run.var_hats())).epsilon(1e-12));
    CHECK(r.var_simp ==
          doctest::Approx(var_simple(run.weights(), run.estimates(), r.estimate)).epsilon(1e-12));
    auto [lo, hi] = confidence_interval(r.estimate, r.var_cond, r.level);
    CHECK(r.ci_lo == lo);
    CHECK(r.ci_hi == hi);
    CHECK(r.ci_lo <= r.estimate);
    CHECK(r.estimate <= r.ci_hi);
  }
}

TEST_CASE("identical inputs give identical exports") {
  auto pool = testing::sim_pool({3, 0, 7, 1, 12, 5, 2, 8, 4, 4});
  auto a = run_active_measurement(pool, noisy(*pool), RunConfig{}, 6, 42);
  auto b = run_active_measurement(pool, noisy(*pool), RunConfig{}, 6, 42);
  std::ostringstream ca, cb, ja, jb;
  write_trajectory_csv(ca, a);
  write_trajectory_csv(cb, b);
  write_trajectory_jsonl(ja, a);
  write_trajectory_jsonl(jb, b);
  CHECK(ca.str() == cb.str());
  CHECK(ja.str() == jb.str());
  auto c = run_active_measurement(pool, noisy(*pool), RunConfig{}, 6, 43);
  std::ostringstream cc;
  write_trajectory_csv(cc, c);
  CHECK(cc.str() != ca.str());
}

TEST_CASE("live run protocol") {
  auto pool = testing::live_pool(3);
  ActiveRun run(pool, PredictionTable(std::vector<double>{1, 1, 2}), RunConfig{}, 5);
  CHECK_CODE(run.observe(1.0), ErrorCode::Conflict);
  const auto first = run.draw();
  CHECK(run.draw().unit == first.unit);
  CHECK_CODE(run.push_predictions(PredictionTable(std::vector<double>{1, 1, 1})), ErrorCode::Conflict);
  CHECK_CODE(run.observe((first.unit + 1) % 3, 1.0), ErrorCode::Conflict);
  CHECK_CODE(run.observe(-1.0), ErrorCode::Label);
  CHECK_CODE(run.observe(std::nan("")), ErrorCode::Label);
  run.observe(first.unit, 2.0);
  CHECK(run.t() == 1);
  run.push_predictions(PredictionTable(std::vector<double>{5, 5, 5}));
  run.draw();
  run.observe(1.0);
  run.draw();
  run.observe(0.0);
  CHECK(run.exhausted());
  CHECK_CODE(run.draw(), ErrorCode::Exhaustion);
  CHECK(run.report().estimate == 3.0);

  ActiveRun other(pool, PredictionTable(std::vector<double>{1, 1, 2}), RunConfig{}, 5);
  CHECK_CODE(other.step(), ErrorCode::Unavailable);
}

TEST_CASE("initial labeled set") {
  auto pool = testing::sim_pool({3, 0, 7, 1, 12});
  LabeledSet init = make_labeled_set(*pool, {{"u4", 12}});
  ActiveRun run(pool, noisy(*pool), RunConfig{}, 9, init);
  CHECK(run.n_eff() == 4);
  CHECK(run.partial() == 12.0);
  for (int k = 0; k < 4; ++k) run.step();
  CHECK(run.report().estimate == 23.0);

  LabeledSet wrong = make_labeled_set(*pool, {{"u4", 11}});
  CHECK_CODE(ActiveRun(pool, noisy(*pool), RunConfig{}, 9, wrong), ErrorCode::Label);
}

TEST_CASE("requesting more steps than units") {
  auto pool = testing::sim_pool({1, 2});
  CHECK_CODE(run_active_measurement(pool, noisy(*pool), RunConfig{}, 3, 1), ErrorCode::Exhaustion);
}

TEST_CASE("label callback") {
  auto pool = testing::sim_pool({1, 2, 3});
  std::size_t calls = 0;
  auto run = run_active_measurement(pool, noisy(*pool), RunConfig{}, 3, 1,
                                    [&](const Unit& u, double q) {
                                      ++calls;
                                      CHECK(q > 0.0);
                                      return *u.true_value;
                                    });
  CHECK(calls == 3);
  CHECK(run.report().estimate == 6.0);
  CHECK_CODE(run_active_measurement(pool, noisy(*pool), RunConfig{}, 1, 1,
                                    [](const Unit&, double) { return -1.0; }),
             ErrorCode::Label);
}
