#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "proposal.hpp"

namespace am {

struct StepRecord {
  std::size_t tau = 0;           // 1-based step index
  std::size_t unit = 0;          // pool index of s_tau
  double f_value = 0.0;          // f(s_tau)
  double q = 0.0;                // q_tau(s_tau)
  double partial_before = 0.0;   // F(D_tau)
  double estimate = 0.0;         // F_hat_tau = F(D_tau) + f / q
};

/// Sampling history of one run: the step records together with every
/// proposal that was used, so q_tau(s) stays queryable for old tau.
class Trajectory {
 public:
  /// Registers the proposal for step steps() + 1.
  void add_proposal(ProposalSnapshot snapshot);
  void add_step(const StepRecord& step);

  std::size_t steps() const noexcept { return records_.size(); }
  std::size_t proposals() const noexcept { return snapshots_.size(); }
  const StepRecord& step(std::size_t tau) const;
  std::span<const StepRecord> records() const noexcept { return records_; }

  /// q_tau(unit).
  double q(std::size_t tau, std::size_t unit) const;

 private:
  std::vector<StepRecord> records_;
  std::vector<ProposalSnapshot> snapshots_;
};

}  // namespace am
