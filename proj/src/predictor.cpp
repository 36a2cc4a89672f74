#include "predictor.hpp"

#include <cmath>
#include <fstream>
#include <istream>

#include "errors.hpp"
#include "numfmt.hpp"
#include "rng.hpp"

namespace am {

namespace {

std::vector<double> frozen_noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> eps(n);
  for (double& e : eps) e = rng.normal();
  return eps;
}

void require_simulation(const UnitPool& pool, const char* who) {
  if (!pool.simulation_mode())
    fail(ErrorCode::Unavailable, std::string(who) + " predictor needs a simulation-mode pool");
}

}  // namespace

PredictionTable OraclePredictor::predict(const UnitPool& pool, const LabeledSet&) const {
  require_simulation(pool, "oracle");
  auto t = pool.truths();
  return PredictionTable(std::vector<double>(t.begin(), t.end()));
}

PredictionTable UniformPredictor::predict(const UnitPool& pool, const LabeledSet&) const {
  return PredictionTable(std::vector<double>(pool.size(), 1.0));
}

NoisyPredictor::NoisyPredictor(const UnitPool& pool, double bias, double sigma, std::uint64_t seed)
    : bias_(bias), sigma_(sigma), eps_(frozen_noise(pool.size(), seed)) {
  if (!(bias > 0.0) || !(sigma >= 0.0)) fail(ErrorCode::Config, "noisy predictor needs bias > 0, sigma >= 0");
}

PredictionTable NoisyPredictor::predict(const UnitPool& pool, const LabeledSet&) const {
  require_simulation(pool, "noisy");
  if (pool.size() != eps_.size()) fail(ErrorCode::Shape, "predictor built for a different pool");
  auto f = pool.truths();
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] * bias_ * std::exp(sigma_ * eps_[i]);
  return PredictionTable(std::move(g));
}

ImprovingPredictor::ImprovingPredictor(const UnitPool& pool, double bias, double sigma0,
                                       double decay, std::uint64_t seed)
    : bias_(bias), sigma0_(sigma0), decay_(decay), eps_(frozen_noise(pool.size(), seed)) {
  if (!(bias > 0.0) || !(sigma0 >= 0.0) || !(decay >= 0.0))
    fail(ErrorCode::Config, "improving predictor needs bias > 0, sigma0 >= 0, decay >= 0");
}

double ImprovingPredictor::sigma_at(std::size_t labels) const {
  return sigma0_ * std::pow(static_cast<double>(labels) + 1.0, -decay_ / 2.0);
}

PredictionTable ImprovingPredictor::predict(const UnitPool& pool, const LabeledSet& labeled) const {
  require_simulation(pool, "improving");
  if (pool.size() != eps_.size()) fail(ErrorCode::Shape, "predictor built for a different pool");
  const double sigma = sigma_at(labeled.size());
  auto f = pool.truths();
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] * bias_ * std::exp(sigma * eps_[i]);
  return PredictionTable(std::move(g));
}

FixedCheckpointPredictor::FixedCheckpointPredictor(std::map<std::size_t, PredictionTable> tables)
    : tables_(std::move(tables)) {
  if (tables_.empty()) fail(ErrorCode::Config, "checkpoint predictor needs at least one table");
}

PredictionTable FixedCheckpointPredictor::predict(const UnitPool&, const LabeledSet& labeled) const {
  auto it = tables_.upper_bound(labeled.size());
  if (it == tables_.begin())
    fail(ErrorCode::Coverage,
         "no checkpoint table for " + std::to_string(labeled.size()) + " labels");
  return std::prev(it)->second;
}

PredictionTable OracleLossPredictor::predict(const UnitPool& pool, const LabeledSet& labeled) const {
  require_simulation(pool, "oracle-loss");
  PredictionTable g = inner_->predict(pool, labeled);
  auto f = pool.truths();
  std::vector<double> loss(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) loss[i] = g.has(i) ? std::abs(f[i] - g.at(i)) : g.at(i);
  return PredictionTable(std::move(loss));
}

FrozenPredictor::FrozenPredictor(std::shared_ptr<const Predictor> inner, const UnitPool& pool)
    : table_(inner->predict(pool, LabeledSet(pool.size()))) {}

std::map<std::size_t, PredictionTable> parse_checkpoints(std::istream& in, const UnitPool& pool) {
  std::map<std::size_t, PredictionTable> tables;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(lineno);
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
      fail(ErrorCode::Parse, where + ": expected threshold<TAB>id<TAB>g_value");
    std::string_view view(line);
    std::size_t threshold = 0;
    auto th = view.substr(0, t1);
    auto res = std::from_chars(th.data(), th.data() + th.size(), threshold);
    if (res.ec != std::errc() || res.ptr != th.data() + th.size())
      fail(ErrorCode::Parse, where + ": bad threshold");
    std::string id(view.substr(t1 + 1, t2 - t1 - 1));
    auto g = parse_double(view.substr(t2 + 1));
    if (!g || !std::isfinite(*g) || *g < 0.0) fail(ErrorCode::Parse, where + ": bad g value");
    auto idx = pool.index_of(id);
    if (!idx) fail(ErrorCode::Parse, where + ": unknown unit id \"" + id + "\"");
    auto [it, inserted] = tables.try_emplace(threshold, PredictionTable(pool.size()));
    (void)inserted;
    it->second.set(*idx, *g);
  }
  return tables;
}

std::map<std::size_t, PredictionTable> load_checkpoints(const std::filesystem::path& path,
                                                        const UnitPool& pool) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint file " + path.string());
  return parse_checkpoints(in, pool);
}

}  // namespace am
