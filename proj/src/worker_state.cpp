#include "crossover/worker_state.hpp"

#include <string>

#include "crossover/error.hpp"

namespace crossover {

WorkerState WorkerState::fresh(std::size_t rank, ParamVector params) {
  WorkerState s;
  s.rank = rank;
  s.momentum = ParamVector::zeros(params.layout());
  s.grad_accumulator = ParamVector::zeros(params.layout());
  s.params = std::move(params);
  return s;
}

void check_states(std::span<const WorkerState> states) {
  if (states.empty()) throw Error(ErrorCode::kInvalidInput, "no worker states");
  const auto& layout = states.front().params.layout();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    if (!layout || !same_layout(s.params.layout(), layout) ||
        !same_layout(s.momentum.layout(), layout) ||
        !same_layout(s.grad_accumulator.layout(), layout)) {
      throw Error(ErrorCode::kCorruptState,
                  "worker " + std::to_string(i) + " does not share the common layout");
    }
    if (!(s.pushsum_weight > 0.0)) {
      throw Error(ErrorCode::kCorruptState,
                  "worker " + std::to_string(i) + " has a nonpositive push-sum weight");
    }
  }
}

}  // namespace crossover
