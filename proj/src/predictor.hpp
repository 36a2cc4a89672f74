#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pool.hpp"
#include "proposal.hpp"

namespace am {

/// Source of predictions g(s). Implementations are immutable after
/// construction so one instance can serve many concurrent runs.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PredictionTable predict(const UnitPool& pool, const LabeledSet& labeled) const = 0;
  virtual std::string name() const = 0;
};

/// g = f. Simulation pools only.
class OraclePredictor final : public Predictor {
 public:
  PredictionTable predict(const UnitPool& pool, const LabeledSet& labeled) const override;
  std::string name() const override { return "oracle"; }
};

/// g = 1 everywhere; yields uniform proposals.
class UniformPredictor final : public Predictor {
 public:
  PredictionTable predict(const UnitPool& pool, const LabeledSet& labeled) const override;
  std::string name() const override { return "uniform"; }
};

/// g(s) = f(s) * bias * exp(sigma * eps_s) with eps_s frozen per unit.
class NoisyPredictor final : public Predictor {
 public:
  NoisyPredictor(const UnitPool& pool, double bias, double sigma, std::uint64_t seed);
  PredictionTable predict(const UnitPool& pool, const LabeledSet& labeled) const override;
  std::string name() const override { return "noisy"; }

 private:
  double bias_;
  double sigma_;
  std::vector<double> eps_;
};

/// Like NoisyPredictor but the noise scale shrinks with the number of labels
/// n as sigma0 * (n + 1)^(-decay / 2), so the induced variance decays
/// roughly like n^(-decay).
class ImprovingPredictor final : public Predictor {
 public:
  ImprovingPredictor(const UnitPool& pool, double bias, double sigma0, double decay,
                     std::uint64_t seed);
  PredictionTable predict(const UnitPool& pool, const LabeledSet& labeled) const override;
  std::string name() const override { return "improving"; }
  double sigma_at(std::size_t labels) const;

 private:
  double bias_;
  double sigma0_;
  double decay_;
  std::vector<double> eps_;
};

/// Step-thresholded prediction tables: with n labels, the table with the
/// largest threshold <= n is used.
class FixedCheckpointPredictor final : public Predictor {
 public:
  explicit FixedCheckpointPredictor(std::map<std::size_t, PredictionTable> tables);
  PredictionTable predict(const UnitPool& pool, const LabeledSet& labeled) const override;
  std::string name() const override { return "checkpoint"; }
  const std::map<std::size_t, PredictionTable>& tables() const noexcept { return tables_; }

 private:
  std::map<std::size_t, PredictionTable> tables_;
};

/// A single fixed table.
class TablePredictor final : public Predictor {
 public:
  explicit TablePredictor(PredictionTable table) : table_(std::move(table)) {}
  PredictionTable predict(const UnitPool&, const LabeledSet&) const override { return table_; }
  std::string name() const override { return "table"; }

 private:
  PredictionTable table_;
};

/// Ground-truth loss |f - g| of a wrapped predictor; the acquisition signal of
/// active testing with an oracle loss.
class OracleLossPredictor final : public Predictor {
 public:
  explicit OracleLossPredictor(std::shared_ptr<const Predictor> inner) : inner_(std::move(inner)) {}
  PredictionTable predict(const UnitPool& pool, const LabeledSet& labeled) const override;
  std::string name() const override { return "oracle_loss(" + inner_->name() + ")"; }

 private:
  std::shared_ptr<const Predictor> inner_;
};

/// Wraps a predictor and freezes it at the empty labeled set.
class FrozenPredictor final : public Predictor {
 public:
  FrozenPredictor(std::shared_ptr<const Predictor> inner, const UnitPool& pool);
  PredictionTable predict(const UnitPool&, const LabeledSet&) const override { return table_; }
  std::string name() const override { return "frozen"; }

 private:
  PredictionTable table_;
};

/// Checkpoint records: threshold<TAB>id<TAB>g_value.
std::map<std::size_t, PredictionTable> parse_checkpoints(std::istream& in, const UnitPool& pool);
std::map<std::size_t, PredictionTable> load_checkpoints(const std::filesystem::path& path,
                                                        const UnitPool& pool);

}  // namespace am
