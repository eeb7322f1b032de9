#include "crossover/hierarchical.hpp"

#include <string>

#include "crossover/error.hpp"
#include "crossover/gossip_engine.hpp"

namespace crossover {

std::size_t GroupLayout::world_size() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

GroupLayout build_groups(std::size_t world_size, std::size_t group_size) {
  if (group_size == 0 || group_size > world_size) {
    throw Error(ErrorCode::kInvalidGroup, "group size " + std::to_string(group_size) +
                                              " must lie in [1, " + std::to_string(world_size) +
                                              "]");
  }
  const std::size_t num_groups = (world_size + group_size - 1) / group_size;
  GroupLayout layout;
  std::size_t next = 0;
  for (std::size_t g = 0; g < num_groups; ++g) {
    const std::size_t size = world_size / num_groups + (g < world_size % num_groups ? 1 : 0);
    std::vector<std::size_t> members(size);
    for (auto& m : members) m = next++;
    layout.leaders.push_back(members.front());
    layout.groups.push_back(std::move(members));
  }
  return layout;
}

namespace {

void check_alignment(std::span<const WorkerState> states, std::span<const ParamVector> grads,
                     const GroupLayout& layout) {
  check_states(states);
  if (grads.size() != states.size()) {
    throw Error(ErrorCode::kCorruptState, "expected one gradient per worker");
  }
  if (layout.world_size() != states.size()) {
    throw Error(ErrorCode::kInvalidGroup, "group layout does not cover the worker list");
  }
  for (const auto& g : grads) {
    if (!g.conforms_to(states.front().params)) {
      throw Error(ErrorCode::kCorruptState, "gradient layout does not match worker state");
    }
  }
}

}  // namespace

std::vector<WorkerState> hierarchical_reduce_step(std::span<const WorkerState> states,
                                                  std::span<const ParamVector> grads,
                                                  const GroupLayout& layout,
                                                  const OptimizerConfig& cfg, double epoch) {
  check_alignment(states, grads, layout);
  std::vector<WorkerState> out(states.begin(), states.end());
  for (std::size_t g = 0; g < layout.num_groups(); ++g) {
    const auto& members = layout.groups[g];
    ParamVector reduced = ParamVector::zeros(states.front().params.layout());
    auto acc = reduced.values();
    for (std::size_t rank : members) {
      const auto src = grads[rank].values();
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += src[j];
    }
    const double count = static_cast<double>(members.size());
    for (auto& v : acc) v /= count;

    const std::size_t leader = layout.leaders[g];
    const auto scales = layer_scales(out[leader].params, reduced, cfg);
    out[leader] = sgd_momentum_step(std::move(out[leader]), reduced, scales, cfg, epoch);
  }
  return out;
}

std::vector<WorkerState> hierarchical_round(std::span<const WorkerState> states,
                                            std::span<const ParamVector> grads,
                                            const GroupLayout& layout, const SegmentPlan& plan,
                                            const HierarchicalStep& step,
                                            const OptimizerConfig& cfg) {
  std::vector<WorkerState> out = hierarchical_reduce_step(states, grads, layout, cfg, step.epoch);

  const std::size_t num_leaders = layout.num_groups();
  if (num_leaders >= 2) {
    std::vector<WorkerState> leaders;
    leaders.reserve(num_leaders);
    for (std::size_t rank : layout.leaders) leaders.push_back(out[rank]);
    const SeedDomain domain =
        num_leaders == states.size() ? SeedDomain::kFlat : SeedDomain::kLeaders;
    const RoundPlan round_plan = plan_round(num_leaders, plan, step.round, step.base_seed, domain);
    leaders = crossover_round(leaders, plan, round_plan);
    for (std::size_t g = 0; g < num_leaders; ++g) out[layout.leaders[g]] = std::move(leaders[g]);
  }

  for (std::size_t g = 0; g < num_leaders; ++g) {
    const std::size_t leader = layout.leaders[g];
    for (std::size_t rank : layout.groups[g]) {
      if (rank != leader) out[rank].params = out[leader].params;
    }
  }
  return out;
}

}  // namespace crossover
