#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace am {

/// Predicted values g(s), indexed by pool position. A NaN entry marks a unit
/// with no prediction.
class PredictionTable {
 public:
  PredictionTable() = default;
  explicit PredictionTable(std::size_t pool_size)
      : values_(pool_size, std::numeric_limits<double>::quiet_NaN()) {}
  explicit PredictionTable(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool has(std::size_t unit) const { return unit < values_.size() && !std::isnan(values_[unit]); }
  double at(std::size_t unit) const { return values_.at(unit); }
  void set(std::size_t unit, double g);
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

struct ClampPolicy {
  enum class Mode { Floor, Offset };

  Mode mode = Mode::Floor;
  double value = 1.0;

  ClampPolicy() = default;
  ClampPolicy(Mode m, double v);

  double apply(double g) const noexcept {
    return mode == Mode::Floor ? (g > value ? g : value) : g + value;
  }

  static ClampPolicy parse(const std::string& mode, double value);
  std::string mode_name() const { return mode == Mode::Floor ? "floor" : "offset"; }
};

/// Proposal weights over the whole pool together with the normalizer of one
/// step. Enough to answer q_tau(s) for any unit s that was unlabeled at tau.
struct ProposalSnapshot {
  std::shared_ptr<const std::vector<double>> weights;
  double normalizer = 0.0;

  double prob(std::size_t unit) const { return (*weights)[unit] / normalizer; }
};

/// Acquisition distribution q_t over the unlabeled units.
class Proposal {
 public:
  Proposal(std::shared_ptr<const std::vector<double>> weights, std::vector<std::size_t> support);

  std::span<const std::size_t> support() const noexcept { return support_; }
  double prob(std::size_t unit) const { return snapshot_.prob(unit); }
  std::vector<double> probs() const;
  const ProposalSnapshot& snapshot() const noexcept { return snapshot_; }

  /// Draw one unit; returns (pool index, q value).
  std::pair<std::size_t, double> sample(Rng& rng) const;

 private:
  ProposalSnapshot snapshot_;
  std::vector<std::size_t> support_;
};

/// Clamped weights for every pool unit; units listed in `required` must have
/// a prediction.
std::shared_ptr<const std::vector<double>> clamped_weights(const PredictionTable& preds,
                                                           std::span<const std::size_t> required,
                                                           const ClampPolicy& clamp);

Proposal build_proposal(const PredictionTable& preds, std::span<const std::size_t> unlabeled,
                        const ClampPolicy& clamp);

/// Reuses previously clamped weights over a (possibly shrunk) support.
Proposal build_proposal(std::shared_ptr<const std::vector<double>> weights,
                        std::span<const std::size_t> unlabeled);

}  // namespace am
