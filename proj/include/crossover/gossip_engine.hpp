#pragma once

// One communication round of segment-wise gossip: every segment gets its
// own random derangement, each worker sends that segment to one peer and
// averages the segment it receives into its own parameters.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crossover/model_core.hpp"
#include "crossover/topology.hpp"
#include "crossover/worker_state.hpp"

namespace crossover {

struct RoundPlan {
  std::size_t round = 0;
  std::vector<DestinationMap> per_segment_maps;

  bool operator==(const RoundPlan&) const = default;
};

RoundPlan plan_round(std::size_t world_size, const SegmentPlan& plan, std::size_t round,
                     std::uint64_t base_seed, SeedDomain domain = SeedDomain::kFlat);

// Pairwise merge: worker i's segment k becomes (own + sender's) / 2 where
// the sender is per_segment_maps[k].sender_of(i). Every read comes from the
// input snapshot, so worker order is irrelevant.
std::vector<WorkerState> crossover_round(std::span<const WorkerState> states,
                                         const SegmentPlan& plan, const RoundPlan& round_plan);

std::vector<double> coordinate_mean(std::span<const WorkerState> states);

// Root-mean-square distance of worker parameters from their mean.
double consensus_distance(std::span<const WorkerState> states);

// Per-worker message and byte counts of one round.
struct RoundTraffic {
  std::vector<std::size_t> messages_sent;
  std::vector<std::size_t> messages_received;
  std::vector<std::size_t> bytes_sent;
  std::vector<std::size_t> bytes_received;
};

RoundTraffic crossover_traffic(const SegmentPlan& plan, const RoundPlan& round_plan,
                               std::size_t element_size);

}  // namespace crossover
