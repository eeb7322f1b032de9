#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crossover/model_core.hpp"

namespace crossover {

// One simulated worker. params, momentum and grad_accumulator always share
// a layout.
struct WorkerState {
  std::size_t rank = 0;
  ParamVector params;
  ParamVector momentum;
  ParamVector grad_accumulator;
  std::size_t accum_count = 0;
  double pushsum_weight = 1.0;

  static WorkerState fresh(std::size_t rank, ParamVector params);

  bool operator==(const WorkerState&) const = default;
};

// Throws kCorruptState unless every state is internally consistent and all
// share one layout. kInvalidInput for an empty list.
void check_states(std::span<const WorkerState> states);

}  // namespace crossover
