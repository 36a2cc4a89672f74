#include "trajectory.hpp"

#include <string>

#include "errors.hpp"

namespace am {

void Trajectory::add_proposal(ProposalSnapshot snapshot) {
  if (snapshots_.size() != records_.size())
    fail(ErrorCode::Sequencing, "a proposal for the next step is already registered");
  snapshots_.push_back(std::move(snapshot));
}

void Trajectory::add_step(const StepRecord& step) {
  if (step.tau != records_.size() + 1 || snapshots_.size() != step.tau)
    fail(ErrorCode::Sequencing, "step " + std::to_string(step.tau) + " recorded out of order");
  records_.push_back(step);
}

const StepRecord& Trajectory::step(std::size_t tau) const {
  if (tau < 1 || tau > records_.size())
    fail(ErrorCode::State, "no step record for tau=" + std::to_string(tau));
  return records_[tau - 1];
}

double Trajectory::q(std::size_t tau, std::size_t unit) const {
  if (tau < 1 || tau > snapshots_.size())
    fail(ErrorCode::State, "no proposal stored for tau=" + std::to_string(tau));
  return snapshots_[tau - 1].prob(unit);
}

}  // namespace am
