#include "pool.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "errors.hpp"
#include "numfmt.hpp"

namespace am {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Mode: return "mode_error";
    case ErrorCode::Duplicate: return "duplicate_error";
    case ErrorCode::Unavailable: return "unavailable";
    case ErrorCode::Domain: return "domain_error";
    case ErrorCode::Coverage: return "coverage_error";
    case ErrorCode::Shape: return "shape_error";
    case ErrorCode::Singularity: return "singularity_error";
    case ErrorCode::DegenerateVariance: return "degenerate_variance";
    case ErrorCode::Normalization: return "normalization_error";
    case ErrorCode::Precondition: return "precondition_error";
    case ErrorCode::State: return "state_error";
    case ErrorCode::Sequencing: return "sequencing_error";
    case ErrorCode::Label: return "label_error";
    case ErrorCode::Exhaustion: return "exhausted";
    case ErrorCode::NoEstimate: return "no_estimate";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Validation: return "validation_error";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Config: return "config_error";
  }
  return "unknown";
}

UnitPool::UnitPool(std::vector<Unit> units) : units_(std::move(units)) {
  if (units_.empty()) fail(ErrorCode::Validation, "pool must contain at least one unit");
  const bool sim = units_.front().true_value.has_value();
  index_.reserve(units_.size());
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const Unit& u = units_[i];
    if (u.id.empty()) fail(ErrorCode::Validation, "unit id must be nonempty");
    if (!index_.emplace(u.id, i).second) fail(ErrorCode::Duplicate, "duplicate unit id: " + u.id);
    if (u.true_value.has_value() != sim)
      fail(ErrorCode::Mode, "pool mixes units with and without true values (unit " + u.id + ")");
    if (sim) {
      double v = *u.true_value;
      if (!std::isfinite(v) || v < 0.0)
        fail(ErrorCode::Validation, "true value of unit " + u.id + " must be finite and >= 0");
      truths_.push_back(v);
    }
  }
  simulation_ = sim;
}

std::optional<std::size_t> UnitPool::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double UnitPool::truth(std::size_t i) const {
  if (!simulation_) fail(ErrorCode::Unavailable, "ground truth unavailable in live mode");
  return truths_.at(i);
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace

UnitPool parse_pool(std::istream& in) {
  std::vector<Unit> units;
  std::unordered_map<std::string, std::size_t> seen;
  std::optional<bool> sim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    const std::string where = "line " + std::to_string(lineno);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty())
      fail(ErrorCode::Parse, where + ": expected id<TAB>payload_ref[<TAB>true_value]");
    Unit u{std::string(fields[0]), std::string(fields[1]), std::nullopt};
    if (fields.size() == 3) {
      auto v = parse_double(fields[2]);
      if (!v || !std::isfinite(*v) || *v < 0.0)
        fail(ErrorCode::Parse, where + ": true value must be a finite number >= 0");
      u.true_value = *v;
    }
    if (!seen.emplace(u.id, lineno).second)
      fail(ErrorCode::Duplicate, where + ": duplicate unit id \"" + u.id + "\"");
    const bool has = u.true_value.has_value();
    if (sim && *sim != has)
      fail(ErrorCode::Mode, where + ": mixed mode, some records carry true values and some do not");
    sim = has;
    units.push_back(std::move(u));
  }
  if (units.empty()) fail(ErrorCode::Parse, "pool file contains no records");
  return UnitPool(std::move(units));
}

UnitPool load_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open pool file " + path.string());
  return parse_pool(in);
}

void write_pool(std::ostream& out, const UnitPool& pool) {
  for (const Unit& u : pool.units()) {
    out << u.id << '\t' << u.payload_ref;
    if (u.true_value) out << '\t' << format_double(*u.true_value);
    out << '\n';
  }
}

double total_true(const UnitPool& pool) {
  if (!pool.simulation_mode()) fail(ErrorCode::Unavailable, "total is unavailable for a live-mode pool");
  double total = 0.0;
  for (double v : pool.truths()) total += v;
  return total;
}

void LabeledSet::add(std::size_t unit, double value) {
  if (unit >= member_.size()) fail(ErrorCode::Validation, "labeled unit outside the pool");
  if (member_[unit]) fail(ErrorCode::Duplicate, "unit labeled twice");
  if (!std::isfinite(value) || value < 0.0) fail(ErrorCode::Label, "labels must be finite and >= 0");
  member_[unit] = 1;
  order_.push_back(unit);
  values_.push_back(value);
}

LabeledSet make_labeled_set(const UnitPool& pool,
                            const std::vector<std::pair<std::string, double>>& labels) {
  LabeledSet set(pool.size());
  for (const auto& [id, value] : labels) {
    auto idx = pool.index_of(id);
    if (!idx) fail(ErrorCode::NotFound, "unknown unit id: " + id);
    set.add(*idx, value);
  }
  return set;
}

double partial_sum(const UnitPool& pool, const LabeledSet& labeled) {
  if (labeled.pool_size() != 0 && labeled.pool_size() != pool.size())
    fail(ErrorCode::Shape, "labeled set does not belong to this pool");
  double sum = 0.0;
  for (double v : labeled.values()) sum += v;
  return sum;
}

}  // namespace am
