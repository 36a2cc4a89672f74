#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace am {

struct Unit {
  std::string id;
  std::string payload_ref;
  std::optional<double> true_value;
};

/// The finite domain of labelable units. Either every unit carries a ground
/// truth value (simulation mode) or none does (live mode).
class UnitPool {
 public:
  UnitPool() = default;
  explicit UnitPool(std::vector<Unit> units);

  std::size_t size() const noexcept { return units_.size(); }
  const Unit& unit(std::size_t i) const { return units_.at(i); }
  std::span<const Unit> units() const noexcept { return units_; }
  std::optional<std::size_t> index_of(const std::string& id) const;
  bool simulation_mode() const noexcept { return simulation_; }

  /// Ground truth of unit i; throws Unavailable in live mode.
  double truth(std::size_t i) const;
  /// Ground truth values in pool order; empty in live mode.
  std::span<const double> truths() const noexcept { return truths_; }

 private:
  std::vector<Unit> units_;
  std::vector<double> truths_;
  std::unordered_map<std::string, std::size_t> index_;
  bool simulation_ = false;
};

UnitPool parse_pool(std::istream& in);
UnitPool load_pool(const std::filesystem::path& path);
void write_pool(std::ostream& out, const UnitPool& pool);

/// F(Omega). Requires simulation mode.
double total_true(const UnitPool& pool);

/// Labeled units in acquisition order, keyed by pool index.
class LabeledSet {
 public:
  LabeledSet() = default;
  explicit LabeledSet(std::size_t pool_size) : member_(pool_size, 0) {}

  void add(std::size_t unit, double value);
  bool contains(std::size_t unit) const noexcept {
    return unit < member_.size() && member_[unit] != 0;
  }
  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }
  std::span<const std::size_t> units() const noexcept { return order_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t pool_size() const noexcept { return member_.size(); }

 private:
  std::vector<std::size_t> order_;
  std::vector<double> values_;
  std::vector<char> member_;
};

/// Builds a labeled set from (id, value) pairs, validating ids against the pool.
LabeledSet make_labeled_set(const UnitPool& pool,
                            const std::vector<std::pair<std::string, double>>& labels);

/// F(D_t): the exactly known labeled mass.
double partial_sum(const UnitPool& pool, const LabeledSet& labeled);

}  // namespace am
