#pragma once

// Two-level gossip: exact gradient reduction inside each group at its
// leader, segment-wise gossip among leaders, then broadcast of the leader's
// parameters back to the group.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crossover/model_core.hpp"
#include "crossover/optimizer.hpp"
#include "crossover/worker_state.hpp"

namespace crossover {

struct GroupLayout {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> leaders;  // leaders[g] is the lowest rank of groups[g]

  std::size_t num_groups() const { return groups.size(); }
  std::size_t world_size() const;
};

// Contiguous rank blocks of `group_size`. A short final block is avoided by
// spreading the remainder, so sizes differ by at most one.
GroupLayout build_groups(std::size_t world_size, std::size_t group_size);

struct HierarchicalStep {
  double epoch = 0.0;
  std::size_t round = 0;
  std::uint64_t base_seed = 0;
};

// `grads[i]` is worker i's gradient for this round. Leader topologies use
// SeedDomain::kLeaders whenever groups are larger than one worker; with
// singleton groups the hierarchy is the flat protocol and uses the flat
// topology stream.
std::vector<WorkerState> hierarchical_round(std::span<const WorkerState> states,
                                            std::span<const ParamVector> grads,
                                            const GroupLayout& layout, const SegmentPlan& plan,
                                            const HierarchicalStep& step,
                                            const OptimizerConfig& cfg);

// Phase-1 output only: leaders after their reduced-gradient step, with all
// other workers untouched. Exposed for checking leader-level invariants.
std::vector<WorkerState> hierarchical_reduce_step(std::span<const WorkerState> states,
                                                  std::span<const ParamVector> grads,
                                                  const GroupLayout& layout,
                                                  const OptimizerConfig& cfg, double epoch);

}  // namespace crossover
