#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "harness.hpp"
#include "test_support.hpp"
#include "variance.hpp"

using namespace am;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.pool.n = 20;
  c.t_grid = {3, 8, 15};
  c.trials = 40;
  c.seed = 99;
  c.threads = 2;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n"
      "pool_kind = uniform\npool_n = 30\npool_lo = 2\npool_hi = 2\n"
      "predictor = oracle\nmethod = dis_wor\nweights = inv\ngamma = 0.25\n"
      "clamp = offset\nclamp_value = 0.5\nt = 5, 10\ntrials = 7\nseed = 3\nformat = jsonl\n");
  ExperimentConfig c = parse_config(in);
  CHECK(c.pool.kind == "uniform");
  CHECK(c.pool.n == 30);
  CHECK(c.predictor.kind == "oracle");
  CHECK(c.method == Method::DIS_WOR);
  CHECK(c.scheme.kind == SchemeKind::Inv);
  CHECK(c.scheme.gamma == 0.25);
  CHECK(c.clamp.mode == ClampPolicy::Mode::Offset);
  CHECK(c.t_grid == std::vector<std::size_t>{5, 10});
  CHECK(c.trials == 7);
  CHECK(c.format == "jsonl");

  std::istringstream again(config_to_text(c));
  CHECK(config_to_text(parse_config(again)) == config_to_text(c));

  std::istringstream unknown("colour = red\n");
  CHECK_CODE(parse_config(unknown), ErrorCode::Config);
  std::istringstream noeq("trials 5\n");
  CHECK_CODE(parse_config(noeq), ErrorCode::Config);
  CHECK_CODE(apply_override(c, "trials", "-1"), ErrorCode::Config);
  CHECK_CODE(apply_override(c, "format", "xml"), ErrorCode::Config);
  CHECK_CODE(load_config("/nonexistent.cfg"), ErrorCode::Config);
}

TEST_CASE("step grid") {
  ExperimentConfig c;
  c.t_fracs = {0.5, 0.1, 0.5};
  CHECK(resolve_grid(c, 50) == std::vector<std::size_t>{5, 25});
  c.t_fracs.clear();
  CHECK_CODE(resolve_grid(c, 50), ErrorCode::Config);
  c.t_grid = {51};
  CHECK_CODE(resolve_grid(c, 50), ErrorCode::Config);
}

TEST_CASE("synthetic pools") {
  PoolSpec u;
  u.kind = "uniform";
  u.n = 12;
  u.lo = u.hi = 4.0;
  UnitPool p = generate_pool(u);
  for (double v : p.truths()) CHECK(v == 4.0);

  PoolSpec c;
  c.n = 25;
  c.bumps = 1;
  c.spread = 0.0;
  c.mass = 100.0;
  c.background = 0.0;
  UnitPool q = generate_pool(c);
  std::size_t nonzero = 0;
  for (double v : q.truths()) nonzero += v > 0.0;
  CHECK(nonzero == 1);
  CHECK(total_true(q) == 100.0);

  PoolSpec d;
  CHECK(generate_pool(d).truths().size() == 50);
  std::ostringstream a, b;
  write_pool(a, generate_pool(d));
  write_pool(b, generate_pool(d));
  CHECK(a.str() == b.str());
  d.kind = "spiral";
  CHECK_CODE(generate_pool(d), ErrorCode::Config);
}

TEST_CASE("fractional error and coverage") {
  CHECK(fractional_error(std::vector<double>{8, 8}, 8) == 0.0);
  CHECK(fractional_error(std::vector<double>{6, 10}, 8) == 0.25);
  CHECK(fractional_error(std::vector<double>{16}, 8) == 1.0);
  CHECK_CODE(fractional_error(std::vector<double>{1}, 0), ErrorCode::Domain);

  CHECK(coverage(std::vector<double>{5}, std::vector<double>{0}, 5, 0.95) == 1.0);
  CHECK(coverage(std::vector<double>{6}, std::vector<double>{0}, 5, 0.95) == 0.0);
  const double z = z_for_level(0.9);
  const double v = 4.0;
  CHECK(coverage(std::vector<double>{5 + z * 2, 5 - z * 2}, std::vector<double>{v, v}, 5, 0.9) == 1.0);
  CHECK_CODE(coverage(std::vector<double>{1, 2}, std::vector<double>{1}, 5, 0.9), ErrorCode::Shape);
}

TEST_CASE("single trial metrics") {
  ExperimentConfig c = small_config();
  c.trials = 1;
  auto pool = make_pool(c.pool);
  TrialMatrix m = collect_trials(c, pool);
  const double truth = total_true(*pool);
  auto rows = summarize(m, truth, c.level, "active", "comb");
  REQUIRE(rows.size() == 3);
  for (std::size_t g = 0; g < 3; ++g) {
    CHECK(rows[g].estimate_mean == m.at(m.estimate, 0, g));
    CHECK(rows[g].fractional_error_mean == std::fabs(m.at(m.estimate, 0, g) - truth) / truth);
    CHECK(rows[g].trials == 1);
  }
}

TEST_CASE("trial m depends only on the master seed and m") {
  ExperimentConfig c = small_config();
  auto pool = make_pool(c.pool);
  TrialMatrix a = collect_trials(c, pool);
  c.trials *= 2;
  c.threads = 3;
  TrialMatrix b = collect_trials(c, pool);
  for (std::size_t m = 0; m < a.trials; ++m)
    for (std::size_t g = 0; g < a.grid.size(); ++g) {
      CHECK(a.at(a.estimate, m, g) == b.at(b.estimate, m, g));
      CHECK(a.at(a.var_cond, m, g) == b.at(b.var_cond, m, g));
    }
}

TEST_CASE("oracle configuration has no error") {
  ExperimentConfig c = small_config();
  c.predictor.kind = "oracle";
  for (const auto& r : run_trials(c)) CHECK(r.fractional_error_mean <= 1e-12);
}

TEST_CASE("results export") {
  ExperimentConfig c = small_config();
  auto rows = run_trials(c);
  for (std::string fmt : {"csv", "jsonl"}) {
    std::stringstream s;
    export_results(rows, s, fmt, config_to_text(c));
    CHECK(read_results(s, fmt) == rows);
  }
  std::ostringstream empty;
  export_results({}, empty, "csv");
  CHECK(empty.str() ==
        "method,scheme,t,fractional_error_mean,fractional_error_se,coverage,coverage_simp,"
        "ci_radius_mean_relative,estimate_mean,estimate_se,trials\n");

  MetricsRow r;
  r.method = "active";
  r.scheme = "comb";
  r.t = 1;
  r.estimate_mean = 0.1;
  r.fractional_error_mean = 1.0 / 3.0;
  std::ostringstream one;
  export_results({r}, one, "csv");
  CHECK(one.str().find(",0.1,") != std::string::npos);
  CHECK(one.str().find("0.3333333333333333") != std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "am_results_test.csv";
  export_results(rows, path, "csv");
  std::ifstream in(path);
  CHECK(read_results(in, "csv") == rows);
  std::filesystem::remove(path);
  CHECK_CODE(export_results(rows, std::filesystem::path("/nonexistent/dir/x.csv"), "csv"), ErrorCode::Io);
}

TEST_CASE("same seed gives identical results") {
  ExperimentConfig c = small_config();
  std::ostringstream a, b;
  export_results(run_trials(c), a, "csv");
  c.threads = 1;
  export_results(run_trials(c), b, "csv");
  CHECK(a.str() == b.str());
}

TEST_CASE("variance model ratios") {
  VarianceModelConfig v;
  v.ys = {0.0};
  v.schemes = {WeightScheme::lure()};
  v.n = 200;
  v.t_max = 150;
  for (const auto& r : variance_model_compare(v)) CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));

  v.ys = {0.0, 0.25, 0.5, 0.75, 1.0};
  v.schemes = {WeightScheme::comb()};
  v.n = 1000;
  v.t_max = 2000;
  double worst = 0.0;
  for (const auto& r : variance_model_compare(v)) {
    CHECK(r.ratio >= 1.0 - 1e-12);
    worst = std::max(worst, r.ratio);
  }
  CHECK(worst <= 1.125 + 1e-9);
  v.schemes = {WeightScheme::inv()};
  CHECK_CODE(variance_model_compare(v), ErrorCode::Config);
}
