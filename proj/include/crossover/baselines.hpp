#pragma once

// Reference protocols: exact AllReduce averaging, push-sum over the
// directed exponential graph, and uniform three-point ring gossip.

#include <cstddef>
#include <span>
#include <vector>

#include "crossover/model_core.hpp"
#include "crossover/worker_state.hpp"

namespace crossover {

struct PushSumPair {
  ParamVector value;
  double weight = 1.0;

  // value / weight
  ParamVector debiased() const;
};

std::vector<WorkerState> allreduce_average(std::span<const WorkerState> states);

// Each worker keeps half of (value, weight) and pushes the other half to
// exponential_peer(i, round, n).
std::vector<PushSumPair> pushsum_round(std::span<const PushSumPair> pairs, std::size_t round);

// x_i' = (x_{i-1} + x_i + x_{i+1}) / 3 from the input snapshot.
std::vector<WorkerState> ring_round(std::span<const WorkerState> states);

// Bytes each worker sends in one ring AllReduce of `elements` values:
// reduce-scatter and all-gather each forward every chunk except one.
std::vector<std::size_t> ring_allreduce_bytes(std::size_t world_size, std::size_t elements,
                                              std::size_t element_size);

}  // namespace crossover
