#include "crossover/baselines.hpp"

#include <cmath>

#include "crossover/error.hpp"
#include "crossover/gossip_engine.hpp"
#include "crossover/topology.hpp"

namespace crossover {

ParamVector PushSumPair::debiased() const {
  ParamVector out = value;
  for (auto& v : out.values()) v /= weight;
  return out;
}

std::vector<WorkerState> allreduce_average(std::span<const WorkerState> states) {
  const auto mean = coordinate_mean(states);
  std::vector<WorkerState> out(states.begin(), states.end());
  for (auto& s : out) {
    auto v = s.params.values();
    std::copy(mean.begin(), mean.end(), v.begin());
  }
  return out;
}

std::vector<PushSumPair> pushsum_round(std::span<const PushSumPair> pairs, std::size_t round) {
  const std::size_t n = pairs.size();
  if (n == 0) throw Error(ErrorCode::kInvalidInput, "no push-sum pairs");
  for (const auto& p : pairs) {
    if (!p.value.conforms_to(pairs.front().value)) {
      throw Error(ErrorCode::kCorruptState, "push-sum values do not share a layout");
    }
    if (!(p.weight > 0.0)) {
      throw Error(ErrorCode::kCorruptState, "push-sum weight must be positive");
    }
  }

  std::vector<PushSumPair> out;
  out.reserve(n);
  for (const auto& p : pairs) {
    PushSumPair kept{p.value, p.weight / 2.0};
    for (auto& v : kept.value.values()) v /= 2.0;
    out.push_back(std::move(kept));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t peer = exponential_peer(i, round, n);
    auto dst = out[peer].value.values();
    const auto src = pairs[i].value.values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j] / 2.0;
    out[peer].weight += pairs[i].weight / 2.0;
  }
  return out;
}

std::vector<WorkerState> ring_round(std::span<const WorkerState> states) {
  check_states(states);
  const std::size_t n = states.size();
  if (n < 2) throw Error(ErrorCode::kInvalidWorld, "ring gossip needs at least 2 workers");
  std::vector<WorkerState> out(states.begin(), states.end());
  for (std::size_t i = 0; i < n; ++i) {
    const auto [left, right] = ring_neighbors(i, n);
    const auto l = states[left].params.values();
    const auto c = states[i].params.values();
    const auto r = states[right].params.values();
    auto dst = out[i].params.values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = (l[j] + c[j] + r[j]) / 3.0;
  }
  return out;
}

std::vector<std::size_t> ring_allreduce_bytes(std::size_t world_size, std::size_t elements,
                                              std::size_t element_size) {
  std::vector<std::size_t> bytes(world_size, 0);
  if (world_size < 2) return bytes;
  // chunk c holds elements/n values, the first elements%n chunks one more
  auto chunk = [&](std::size_t c) {
    return elements / world_size + (c < elements % world_size ? 1 : 0);
  };
  for (std::size_t i = 0; i < world_size; ++i) {
    // rank i never forwards chunk (i + 1) mod n in either phase
    const std::size_t skipped = chunk((i + 1) % world_size);
    bytes[i] = 2 * (elements - skipped) * element_size;
  }
  return bytes;
}

}  // namespace crossover
