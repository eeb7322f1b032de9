#include "crossover/gossip_engine.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "crossover/error.hpp"

namespace crossover {

RoundPlan plan_round(std::size_t world_size, const SegmentPlan& plan, std::size_t round,
                     std::uint64_t base_seed, SeedDomain domain) {
  const RouletteMatrix roulettes = init_roulettes(world_size);
  RoundPlan out;
  out.round = round;
  out.per_segment_maps.reserve(plan.num_segments());
  for (std::size_t k = 0; k < plan.num_segments(); ++k) {
    out.per_segment_maps.push_back(
        select_destinations(derive_seed(base_seed, round, k, domain), world_size, roulettes));
  }
  return out;
}

std::vector<WorkerState> crossover_round(std::span<const WorkerState> states,
                                         const SegmentPlan& plan, const RoundPlan& round_plan) {
  check_states(states);
  if (!same_layout(states.front().params.layout(), plan.layout())) {
    throw Error(ErrorCode::kCorruptState, "worker layout does not match the segment plan");
  }
  if (round_plan.per_segment_maps.size() != plan.num_segments()) {
    throw Error(ErrorCode::kCorruptState, "round plan has " +
                                              std::to_string(round_plan.per_segment_maps.size()) +
                                              " maps for " + std::to_string(plan.num_segments()) +
                                              " segments");
  }
  const std::size_t n = states.size();
  for (const auto& map : round_plan.per_segment_maps) {
    if (map.world_size() != n) {
      throw Error(ErrorCode::kCorruptState, "destination map does not match worker count");
    }
  }

  std::vector<WorkerState> out(states.begin(), states.end());
  for (std::size_t k = 0; k < plan.num_segments(); ++k) {
    const auto& map = round_plan.per_segment_maps[k];
    const auto& range = plan.range(k);
    for (std::size_t i = 0; i < n; ++i) {
      const FlatSegment received = flatten_tensors(states[map.sender_of(i)].params, plan, k);
      const auto layers = unflatten_tensors(received, plan);
      for (std::size_t l = range.first; l < range.end; ++l) {
        const auto own = states[i].params.layer(l);
        const auto& incoming = layers[l - range.first];
        auto merged = out[i].params.layer(l);
        for (std::size_t e = 0; e < merged.size(); ++e) merged[e] = (own[e] + incoming[e]) / 2.0;
      }
    }
  }
  return out;
}

std::vector<double> coordinate_mean(std::span<const WorkerState> states) {
  check_states(states);
  std::vector<double> mean(states.front().params.size(), 0.0);
  for (const auto& s : states) {
    const auto v = s.params.values();
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += v[j];
  }
  for (auto& m : mean) m /= static_cast<double>(states.size());
  return mean;
}

double consensus_distance(std::span<const WorkerState> states) {
  check_states(states);
  // Shifted by worker 0 so bitwise-identical replicas give exactly zero.
  const auto ref = states.front().params.values();
  const std::size_t dim = ref.size();
  std::vector<double> shift_mean(dim, 0.0);
  for (const auto& s : states) {
    const auto v = s.params.values();
    for (std::size_t j = 0; j < dim; ++j) shift_mean[j] += v[j] - ref[j];
  }
  for (auto& m : shift_mean) m /= static_cast<double>(states.size());
  double total = 0.0;
  for (const auto& s : states) {
    const auto v = s.params.values();
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = (v[j] - ref[j]) - shift_mean[j];
      total += d * d;
    }
  }
  return std::sqrt(total / static_cast<double>(states.size()));
}

RoundTraffic crossover_traffic(const SegmentPlan& plan, const RoundPlan& round_plan,
                               std::size_t element_size) {
  const std::size_t n =
      round_plan.per_segment_maps.empty() ? 0 : round_plan.per_segment_maps.front().world_size();
  RoundTraffic t{std::vector<std::size_t>(n), std::vector<std::size_t>(n),
                 std::vector<std::size_t>(n), std::vector<std::size_t>(n)};
  for (std::size_t k = 0; k < round_plan.per_segment_maps.size(); ++k) {
    const auto& map = round_plan.per_segment_maps[k];
    const std::size_t bytes = plan.element_count(k) * element_size;
    for (std::size_t receiver = 0; receiver < n; ++receiver) {
      const std::size_t sender = map.sender_of(receiver);
      ++t.messages_sent[sender];
      ++t.messages_received[receiver];
      t.bytes_sent[sender] += bytes;
      t.bytes_received[receiver] += bytes;
    }
  }
  return t;
}

}  // namespace crossover
