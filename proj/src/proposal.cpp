#include "proposal.hpp"

#include "errors.hpp"

namespace am {

PredictionTable::PredictionTable(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isnan(v) && (!std::isfinite(v) || v < 0.0))
      fail(ErrorCode::Validation, "predictions must be finite and >= 0");
}

void PredictionTable::set(std::size_t unit, double g) {
  if (unit >= values_.size()) fail(ErrorCode::Validation, "prediction for a unit outside the pool");
  if (!std::isfinite(g) || g < 0.0) fail(ErrorCode::Validation, "predictions must be finite and >= 0");
  values_[unit] = g;
}

ClampPolicy::ClampPolicy(Mode m, double v) : mode(m), value(v) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::Config, "clamp value must be positive");
}

ClampPolicy ClampPolicy::parse(const std::string& mode, double value) {
  if (mode == "floor") return ClampPolicy(Mode::Floor, value);
  if (mode == "offset") return ClampPolicy(Mode::Offset, value);
  fail(ErrorCode::Config, "unknown clamp mode: " + mode);
}

Proposal::Proposal(std::shared_ptr<const std::vector<double>> weights,
                   std::vector<std::size_t> support)
    : support_(std::move(support)) {
  if (support_.empty()) fail(ErrorCode::Exhaustion, "proposal over an empty support");
  double z = 0.0;
  for (std::size_t i : support_) z += (*weights)[i];
  snapshot_ = ProposalSnapshot{std::move(weights), z};
}

std::vector<double> Proposal::probs() const {
  std::vector<double> out;
  out.reserve(support_.size());
  for (std::size_t i : support_) out.push_back(prob(i));
  return out;
}

std::pair<std::size_t, double> Proposal::sample(Rng& rng) const {
  const auto& w = *snapshot_.weights;
  const double target = rng.uniform() * snapshot_.normalizer;
  double cum = 0.0;
  for (std::size_t i : support_) {
    cum += w[i];
    if (target < cum) return {i, prob(i)};
  }
  // Rounding can leave target just above the last partial sum.
  std::size_t last = support_.back();
  return {last, prob(last)};
}

std::shared_ptr<const std::vector<double>> clamped_weights(const PredictionTable& preds,
                                                           std::span<const std::size_t> required,
                                                           const ClampPolicy& clamp) {
  for (std::size_t i : required)
    if (!preds.has(i))
      fail(ErrorCode::Coverage, "missing prediction for unlabeled unit #" + std::to_string(i));
  auto out = std::make_shared<std::vector<double>>(preds.size());
  auto vals = preds.values();
  for (std::size_t i = 0; i < vals.size(); ++i)
    (*out)[i] = std::isnan(vals[i]) ? 0.0 : clamp.apply(vals[i]);
  return out;
}

Proposal build_proposal(const PredictionTable& preds, std::span<const std::size_t> unlabeled,
                        const ClampPolicy& clamp) {
  if (unlabeled.empty()) fail(ErrorCode::Exhaustion, "no unlabeled units left");
  return Proposal(clamped_weights(preds, unlabeled, clamp),
                  std::vector<std::size_t>(unlabeled.begin(), unlabeled.end()));
}

Proposal build_proposal(std::shared_ptr<const std::vector<double>> weights,
                        std::span<const std::size_t> unlabeled) {
  if (unlabeled.empty()) fail(ErrorCode::Exhaustion, "no unlabeled units left");
  return Proposal(std::move(weights), std::vector<std::size_t>(unlabeled.begin(), unlabeled.end()));
}

}  // namespace am
