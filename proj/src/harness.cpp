#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"
#include "numfmt.hpp"

namespace am {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  auto d = parse_double(v);
  if (!d || !std::isfinite(*d)) fail(ErrorCode::Config, key + ": expected a number, got \"" + v + "\"");
  return *d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(ErrorCode::Config, key + ": expected a nonnegative integer, got \"" + v + "\"");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::Config, key + ": expected true or false");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  PoolSpec& p = cfg.pool;
  PredictorSpec& pr = cfg.predictor;
  if (key == "pool") p.file = v;
  else if (key == "pool_kind") p.kind = v;
  else if (key == "pool_n") p.n = to_u64(key, v);
  else if (key == "pool_seed") p.seed = to_u64(key, v);
  else if (key == "pool_bumps") p.bumps = to_u64(key, v);
  else if (key == "pool_spread") p.spread = to_double(key, v);
  else if (key == "pool_mass") p.mass = to_double(key, v);
  else if (key == "pool_background") p.background = to_double(key, v);
  else if (key == "pool_lo") p.lo = to_double(key, v);
  else if (key == "pool_hi") p.hi = to_double(key, v);
  else if (key == "pool_integer") p.integer = to_bool(key, v);
  else if (key == "predictor") pr.kind = v;
  else if (key == "bias") pr.bias = to_double(key, v);
  else if (key == "sigma") pr.sigma = to_double(key, v);
  else if (key == "sigma0") pr.sigma0 = to_double(key, v);
  else if (key == "decay") pr.decay = to_double(key, v);
  else if (key == "predictor_seed") pr.seed = to_u64(key, v);
  else if (key == "checkpoint_file") pr.checkpoint_file = v;
  else if (key == "method") cfg.method = parse_method(v);
  else if (key == "weights") cfg.scheme = WeightScheme::parse(v, cfg.gamma);
  else if (key == "gamma") {
    cfg.gamma = to_double(key, v);
    if (cfg.scheme.kind == SchemeKind::Inv) cfg.scheme = WeightScheme::inv(cfg.gamma);
  } else if (key == "baseline_weights") cfg.baseline_scheme = WeightScheme::parse(v, cfg.gamma);
  else if (key == "clamp") cfg.clamp = ClampPolicy::parse(v, cfg.clamp.value);
  else if (key == "clamp_value") cfg.clamp = ClampPolicy(cfg.clamp.mode, to_double(key, v));
  else if (key == "t" || key == "T") {
    cfg.t_grid.clear();
    for (const auto& item : split_list(v)) cfg.t_grid.push_back(to_u64(key, item));
  } else if (key == "t_frac") {
    cfg.t_fracs.clear();
    for (const auto& item : split_list(v)) cfg.t_fracs.push_back(to_double(key, item));
  } else if (key == "trials") cfg.trials = to_u64(key, v);
  else if (key == "seed") cfg.seed = to_u64(key, v);
  else if (key == "level") cfg.level = to_double(key, v);
  else if (key == "retrain_every") cfg.retrain_every = to_u64(key, v);
  else if (key == "out") cfg.out = v;
  else if (key == "format") {
    if (v != "csv" && v != "jsonl") fail(ErrorCode::Config, "format must be csv or jsonl");
    cfg.format = v;
  } else if (key == "threads") cfg.threads = to_u64(key, v);
  else fail(ErrorCode::Config, "unknown configuration key: " + key);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key = value");
    apply_override(cfg, trim(std::string_view(s).substr(0, eq)), s.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open config file " + path.string());
  return parse_config(in);
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  const auto num = [](double d) { return format_double(d); };
  if (!c.pool.file.empty()) {
    o << "pool = " << c.pool.file << '\n';
  } else {
    o << "pool_kind = " << c.pool.kind << "\npool_n = " << c.pool.n << "\npool_seed = " << c.pool.seed
      << "\npool_bumps = " << c.pool.bumps << "\npool_spread = " << num(c.pool.spread)
      << "\npool_mass = " << num(c.pool.mass) << "\npool_background = " << num(c.pool.background)
      << "\npool_lo = " << num(c.pool.lo) << "\npool_hi = " << num(c.pool.hi)
      << "\npool_integer = " << (c.pool.integer ? "true" : "false") << '\n';
  }
  o << "predictor = " << c.predictor.kind << "\nbias = " << num(c.predictor.bias)
    << "\nsigma = " << num(c.predictor.sigma) << "\nsigma0 = " << num(c.predictor.sigma0)
    << "\ndecay = " << num(c.predictor.decay) << "\npredictor_seed = " << c.predictor.seed << '\n';
  if (!c.predictor.checkpoint_file.empty()) o << "checkpoint_file = " << c.predictor.checkpoint_file << '\n';
  o << "method = " << method_name(c.method) << "\nweights = " << c.scheme.name()
    << "\ngamma = " << num(c.gamma) << '\n';
  if (c.baseline_scheme) o << "baseline_weights = " << c.baseline_scheme->name() << '\n';
  o << "clamp = " << c.clamp.mode_name() << "\nclamp_value = " << num(c.clamp.value) << '\n';
  if (!c.t_grid.empty()) o << "t = " << join(c.t_grid, [](std::size_t t) { return std::to_string(t); }) << '\n';
  if (!c.t_fracs.empty()) o << "t_frac = " << join(c.t_fracs, num) << '\n';
  o << "trials = " << c.trials << "\nseed = " << c.seed << "\nlevel = " << num(c.level)
    << "\nretrain_every = " << c.retrain_every << "\nformat = " << c.format << '\n';
  if (!c.out.empty()) o << "out = " << c.out << '\n';
  return o.str();
}

UnitPool generate_pool(const PoolSpec& spec) {
  if (spec.n < 2) fail(ErrorCode::Config, "generated pools need N >= 2");
  Rng rng(spec.seed);
  std::vector<double> values(spec.n, 0.0);
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec.n))));
  auto coord = [&](std::size_t i) {
    return std::pair<double, double>{static_cast<double>(i % side) + 0.5,
                                     static_cast<double>(i / side) + 0.5};
  };
  if (spec.kind == "clustered") {
    if (spec.spread < 0.0 || spec.mass < 0.0 || spec.background < 0.0)
      fail(ErrorCode::Config, "clustered pools need spread, mass, background >= 0");
    std::vector<double> kernel(spec.n);
    for (std::size_t b = 0; b < spec.bumps; ++b) {
      const double cx = rng.uniform() * static_cast<double>(side);
      const double cy = rng.uniform() * static_cast<double>(side);
      if (spec.spread == 0.0) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < spec.n; ++i) {
          auto [x, y] = coord(i);
          const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          if (d < best_d) best_d = d, best = i;
        }
        values[best] += spec.mass;
        continue;
      }
      double total = 0.0;
      for (std::size_t i = 0; i < spec.n; ++i) {
        auto [x, y] = coord(i);
        const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        kernel[i] = std::exp(-d / (2.0 * spec.spread * spec.spread));
        total += kernel[i];
      }
      for (std::size_t i = 0; i < spec.n; ++i) values[i] += spec.mass * kernel[i] / total;
    }
    for (double& v : values) v += spec.background;
  } else if (spec.kind == "uniform") {
    if (spec.lo < 0.0 || spec.hi < spec.lo) fail(ErrorCode::Config, "uniform pools need 0 <= lo <= hi");
    for (double& v : values) v = spec.lo + (spec.hi - spec.lo) * rng.uniform();
  } else {
    fail(ErrorCode::Config, "unknown pool kind: " + spec.kind);
  }
  std::vector<Unit> units;
  units.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    auto [x, y] = coord(i);
    char id[32];
    std::snprintf(id, sizeof(id), "u%05zu", i);
    char payload[64];
    std::snprintf(payload, sizeof(payload), "grid:%zu,%zu", static_cast<std::size_t>(x),
                  static_cast<std::size_t>(y));
    units.push_back({id, payload, spec.integer ? std::round(values[i]) : values[i]});
  }
  return UnitPool(std::move(units));
}

std::shared_ptr<const UnitPool> make_pool(const PoolSpec& spec) {
  if (!spec.file.empty()) return std::make_shared<const UnitPool>(load_pool(spec.file));
  return std::make_shared<const UnitPool>(generate_pool(spec));
}

std::shared_ptr<const Predictor> make_predictor(const PredictorSpec& s, const UnitPool& pool) {
  if (s.kind == "oracle") return std::make_shared<OraclePredictor>();
  if (s.kind == "uniform") return std::make_shared<UniformPredictor>();
  if (s.kind == "noisy") return std::make_shared<NoisyPredictor>(pool, s.bias, s.sigma, s.seed);
  if (s.kind == "improving")
    return std::make_shared<ImprovingPredictor>(pool, s.bias, s.sigma0, s.decay, s.seed);
  if (s.kind == "checkpoint") {
    if (s.checkpoint_file.empty()) fail(ErrorCode::Config, "checkpoint predictor needs checkpoint_file");
    return std::make_shared<FixedCheckpointPredictor>(load_checkpoints(s.checkpoint_file, pool));
  }
  fail(ErrorCode::Config, "unknown predictor: " + s.kind);
}

MethodSetup make_setup(const ExperimentConfig& cfg, std::shared_ptr<const UnitPool> pool) {
  MethodSetup setup;
  setup.predictor = make_predictor(cfg.predictor, *pool);
  setup.pool = std::move(pool);
  setup.scheme = cfg.scheme;
  setup.baseline_scheme = cfg.baseline_scheme;
  setup.clamp = cfg.clamp;
  setup.retrain_every = cfg.retrain_every;
  setup.level = cfg.level;
  return setup;
}

std::vector<std::size_t> resolve_grid(const ExperimentConfig& cfg, std::size_t n) {
  std::vector<std::size_t> grid = cfg.t_grid;
  for (double frac : cfg.t_fracs) {
    if (!(frac > 0.0 && frac <= 1.0)) fail(ErrorCode::Config, "t_frac entries must lie in (0, 1]");
    grid.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)))));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) fail(ErrorCode::Config, "no steps requested (set t or t_frac)");
  if (grid.front() == 0) fail(ErrorCode::Config, "steps must be >= 1");
  if (is_wor(cfg.method) && grid.back() > n)
    fail(ErrorCode::Config, "step " + std::to_string(grid.back()) + " exceeds the pool size " + std::to_string(n));
  return grid;
}

double fractional_error(std::span<const double> estimates, double truth) {
  if (!(truth > 0.0)) fail(ErrorCode::Domain, "fractional error needs a positive true total");
  if (estimates.empty()) return 0.0;
  double sum = 0.0;
  for (double e : estimates) sum += std::abs(e - truth) / truth;
  return sum / static_cast<double>(estimates.size());
}

double coverage(std::span<const double> estimates, std::span<const double> var_hats, double truth,
                double level) {
  if (estimates.size() != var_hats.size()) fail(ErrorCode::Shape, "estimates and variances differ in length");
  if (estimates.empty()) return 0.0;
  const double z = z_for_level(level);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i)
    if (std::abs(estimates[i] - truth) <= z * std::sqrt(std::max(var_hats[i], 0.0))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(estimates.size());
}

std::vector<double> TrialMatrix::column(const std::vector<double>& v, std::size_t g) const {
  std::vector<double> out(trials);
  for (std::size_t m = 0; m < trials; ++m) out[m] = at(v, m, g);
  return out;
}

std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) {
    n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ACTIVE_MEASURE_THREADS")) {
      std::size_t cap = 0;
      auto res = std::from_chars(env, env + std::char_traits<char>::length(env), cap);
      if (res.ec == std::errc() && cap > 0) n = std::min(n, cap);
    }
  }
  return n;
}

TrialMatrix collect_trials(const ExperimentConfig& cfg, std::shared_ptr<const UnitPool> pool) {
  if (cfg.trials < 1) fail(ErrorCode::Config, "trials must be >= 1");
  const MethodSetup setup = make_setup(cfg, pool);
  TrialMatrix m;
  m.grid = resolve_grid(cfg, pool->size());
  m.trials = cfg.trials;
  const std::size_t cells = m.trials * m.grid.size();
  m.estimate.resize(cells);
  m.var_cond.resize(cells);
  m.var_simp.resize(cells);
  m.base.resize(cells);
  const std::size_t steps = m.grid.back();

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t trial = next.fetch_add(1);
      if (trial >= m.trials) return;
      try {
        auto trace = run_method(cfg.method, setup, steps, derive_seed(cfg.seed, trial));
        for (std::size_t g = 0; g < m.grid.size(); ++g) {
          const TracePoint& p = trace[m.grid[g] - 1];
          const std::size_t cell = trial * m.grid.size() + g;
          m.estimate[cell] = p.estimate;
          m.var_cond[cell] = p.var_cond;
          m.var_simp[cell] = p.var_simp;
          m.base[cell] = p.base;
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = m.trials;
        return;
      }
    }
  };
  const std::size_t workers = std::min(worker_count(cfg.threads), m.trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool_threads;
    for (std::size_t i = 0; i < workers; ++i) pool_threads.emplace_back(worker);
    for (auto& th : pool_threads) th.join();
  }
  if (error) std::rethrow_exception(error);
  return m;
}

std::vector<MetricsRow> summarize(const TrialMatrix& m, double truth, double level,
                                  const std::string& method, const std::string& scheme) {
  if (!(truth > 0.0)) fail(ErrorCode::Domain, "metrics need a positive true total");
  const double z = z_for_level(level);
  std::vector<MetricsRow> rows;
  const auto mean_se = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double n = static_cast<double>(xs.size());
    const double se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return std::pair{mean, se};
  };
  for (std::size_t g = 0; g < m.grid.size(); ++g) {
    const auto est = m.column(m.estimate, g);
    const auto vc = m.column(m.var_cond, g);
    const auto vs = m.column(m.var_simp, g);
    std::vector<double> fe(est.size()), radius(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
      fe[i] = std::abs(est[i] - truth) / truth;
      radius[i] = z * std::sqrt(std::max(vc[i], 0.0)) / truth;
    }
    MetricsRow row;
    row.method = method;
    row.scheme = scheme;
    row.t = m.grid[g];
    std::tie(row.fractional_error_mean, row.fractional_error_se) = mean_se(fe);
    row.coverage = coverage(est, vc, truth, level);
    row.coverage_simp = coverage(est, vs, truth, level);
    row.ci_radius_mean_relative = mean_se(radius).first;
    std::tie(row.estimate_mean, row.estimate_se) = mean_se(est);
    row.trials = m.trials;
    rows.push_back(row);
  }
  return rows;
}

std::vector<MetricsRow> run_trials(const ExperimentConfig& cfg) {
  auto pool = make_pool(cfg.pool);
  const TrialMatrix m = collect_trials(cfg, pool);
  const std::string scheme =
      cfg.method == Method::Active ? cfg.scheme.name()
      : is_wor(cfg.method)        ? wor_config(cfg.method, make_setup(cfg, pool)).scheme.name()
      : cfg.method == Method::DIS_AIS ? "sqrt"
                                      : "uniform";
  return summarize(m, total_true(*pool), cfg.level, method_name(cfg.method), scheme);
}

namespace {

constexpr const char* kCsvHeader =
    "method,scheme,t,fractional_error_mean,fractional_error_se,coverage,coverage_simp,"
    "ci_radius_mean_relative,estimate_mean,estimate_se,trials";

}  // namespace

void export_results(const std::vector<MetricsRow>& rows, std::ostream& out,
                    const std::string& format, const std::string& header_comment) {
  if (format == "csv") {
    std::istringstream comment(header_comment);
    for (std::string line; std::getline(comment, line);) out << "# " << line << '\n';
    out << kCsvHeader << '\n';
    for (const MetricsRow& r : rows)
      out << r.method << ',' << r.scheme << ',' << r.t << ',' << format_double(r.fractional_error_mean)
          << ',' << format_double(r.fractional_error_se) << ',' << format_double(r.coverage) << ','
          << format_double(r.coverage_simp) << ',' << format_double(r.ci_radius_mean_relative) << ','
          << format_double(r.estimate_mean) << ',' << format_double(r.estimate_se) << ',' << r.trials
          << '\n';
  } else if (format == "jsonl") {
    nlohmann::json header = {{"config", header_comment}};
    out << header.dump() << '\n';
    for (const MetricsRow& r : rows) {
      out << "{\"method\":\"" << r.method << "\",\"scheme\":\"" << r.scheme << "\",\"t\":" << r.t
          << ",\"fractional_error_mean\":" << format_double(r.fractional_error_mean)
          << ",\"fractional_error_se\":" << format_double(r.fractional_error_se)
          << ",\"coverage\":" << format_double(r.coverage)
          << ",\"coverage_simp\":" << format_double(r.coverage_simp)
          << ",\"ci_radius_mean_relative\":" << format_double(r.ci_radius_mean_relative)
          << ",\"estimate_mean\":" << format_double(r.estimate_mean)
          << ",\"estimate_se\":" << format_double(r.estimate_se) << ",\"trials\":" << r.trials << "}\n";
    }
  } else {
    fail(ErrorCode::Config, "unknown output format: " + format);
  }
}

void export_results(const std::vector<MetricsRow>& rows, const std::filesystem::path& path,
                    const std::string& format, const std::string& header_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write results to " + path.string());
  export_results(rows, out, format, header_comment);
  out.flush();
  if (!out) fail(ErrorCode::Io, "failed writing results to " + path.string());
}

std::vector<MetricsRow> read_results(std::istream& in, const std::string& format) {
  std::vector<MetricsRow> rows;
  std::string line;
  std::size_t lineno = 0;
  const auto num = [&](std::string_view s) {
    auto d = parse_double(s);
    if (!d) fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": bad number");
    return *d;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    if (format == "csv") {
      if (line == kCsvHeader) continue;
      std::vector<std::string> f;
      std::istringstream ls(line);
      for (std::string item; std::getline(ls, item, ',');) f.push_back(item);
      if (f.size() != 11) fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected 11 fields");
      MetricsRow r{f[0], f[1], static_cast<std::size_t>(num(f[2])), num(f[3]), num(f[4]), num(f[5]),
                   num(f[6]), num(f[7]), num(f[8]), num(f[9]), static_cast<std::size_t>(num(f[10]))};
      rows.push_back(r);
    } else {
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": invalid JSON");
      if (j.contains("config")) continue;
      MetricsRow r;
      r.method = j.at("method").get<std::string>();
      r.scheme = j.at("scheme").get<std::string>();
      r.t = j.at("t").get<std::size_t>();
      r.fractional_error_mean = j.at("fractional_error_mean").get<double>();
      r.fractional_error_se = j.at("fractional_error_se").get<double>();
      r.coverage = j.at("coverage").get<double>();
      r.coverage_simp = j.at("coverage_simp").get<double>();
      r.ci_radius_mean_relative = j.at("ci_radius_mean_relative").get<double>();
      r.estimate_mean = j.at("estimate_mean").get<double>();
      r.estimate_se = j.at("estimate_se").get<double>();
      r.trials = j.at("trials").get<std::size_t>();
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<RatioRow> variance_model_compare(const VarianceModelConfig& cfg) {
  if (cfg.n < 2) fail(ErrorCode::Config, "variance model needs N >= 2");
  const std::size_t t_max = std::min(cfg.t_max, cfg.n - 1);
  std::vector<RatioRow> rows;
  for (const WeightScheme& scheme : cfg.schemes) {
    if (scheme.kind == SchemeKind::Inv) fail(ErrorCode::Config, "INV weights depend on sampled data");
    for (double y : cfg.ys) {
      if (!(y >= 0.0 && y <= 1.0)) fail(ErrorCode::Config, "decay rate y must lie in [0, 1]");
      double weighted = 0.0, inverse = 0.0, mass = 0.0;
      for (std::size_t tau = 1; tau <= t_max; ++tau) {
        const double w = lure_weight(tau, cfg.n);
        const double x = static_cast<double>(tau);
        const double var = cfg.c * std::pow(x, -y) / w;
        double alpha = 0.0;
        switch (scheme.kind) {
          case SchemeKind::Sqrt: alpha = std::sqrt(x); break;
          case SchemeKind::Lure: alpha = w; break;
          default: alpha = w * std::sqrt(x); break;
        }
        weighted += alpha * alpha * var;
        inverse += 1.0 / var;
        mass += alpha;
        rows.push_back({scheme.name(), y, tau, weighted * inverse / (mass * mass)});
      }
    }
  }
  return rows;
}

}  // namespace am
