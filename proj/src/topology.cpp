#include "crossover/topology.hpp"

#include <cmath>
#include <string>

#include "crossover/error.hpp"
#include "crossover/rng.hpp"

namespace crossover {

RouletteMatrix::RouletteMatrix(std::size_t world_size, std::vector<double> probs)
    : world_size_(world_size), probs_(std::move(probs)) {
  if (world_size_ < 2) {
    throw Error(ErrorCode::kInvalidWorld, "world size must be at least 2, got " +
                                              std::to_string(world_size_));
  }
  if (probs_.size() != world_size_ * world_size_) {
    throw Error(ErrorCode::kInvalidInput, "roulette table is not world_size x world_size");
  }
  for (std::size_t i = 0; i < world_size_; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < world_size_; ++j) {
      const double p = at(i, j);
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::kInvalidInput, "roulette entries must be finite and nonnegative");
      }
      sum += p;
    }
    if (at(i, i) != 0.0) {
      throw Error(ErrorCode::kInvalidInput, "roulette row " + std::to_string(i) +
                                                " gives its own rank nonzero probability");
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw Error(ErrorCode::kInvalidInput, "roulette row " + std::to_string(i) +
                                                " does not sum to 1");
    }
  }
}

RouletteMatrix init_roulettes(std::size_t world_size) {
  if (world_size < 2) {
    throw Error(ErrorCode::kInvalidWorld, "world size must be at least 2, got " +
                                              std::to_string(world_size));
  }
  const double p = 1.0 / static_cast<double>(world_size - 1);
  std::vector<double> probs(world_size * world_size, p);
  for (std::size_t i = 0; i < world_size; ++i) probs[i * world_size + i] = 0.0;
  return RouletteMatrix(world_size, std::move(probs));
}

DestinationMap::DestinationMap(std::vector<std::size_t> sender_of)
    : sender_of_(std::move(sender_of)), receiver_of_(sender_of_.size(), sender_of_.size()) {
  const std::size_t n = sender_of_.size();
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t s = sender_of_[r];
    if (s >= n || s == r || receiver_of_[s] != n) {
      throw Error(ErrorCode::kTopologyFailure, "destination map is not a derangement");
    }
    receiver_of_[s] = r;
  }
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t round, std::uint64_t segment_index,
                          SeedDomain domain) {
  constexpr std::uint64_t g = SplitMix64::kGamma;
  std::uint64_t h = SplitMix64::mix(base_seed ^ (static_cast<std::uint64_t>(domain) * g));
  h = SplitMix64::mix(h ^ SplitMix64::mix(round + g));
  h = SplitMix64::mix(h ^ SplitMix64::mix(segment_index + 2 * g));
  return h;
}

DestinationMap select_destinations(std::uint64_t seed, std::size_t world_size,
                                   const RouletteMatrix& roulettes) {
  if (world_size < 2) {
    throw Error(ErrorCode::kInvalidWorld, "world size must be at least 2");
  }
  if (roulettes.world_size() != world_size) {
    throw Error(ErrorCode::kInvalidInput, "roulette table size does not match world size");
  }
  SplitMix64 rng(seed);
  std::vector<double> row(world_size);
  std::vector<bool> taken(world_size);
  std::vector<std::size_t> dest_list;
  dest_list.reserve(world_size);

  for (std::size_t attempt = 0; attempt < kMaxTopologyRestarts; ++attempt) {
    dest_list.clear();
    taken.assign(world_size, false);
    bool dead_end = false;
    for (std::size_t i = 0; i < world_size && !dead_end; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < world_size; ++j) {
        row[j] = (taken[j] || j == i) ? 0.0 : roulettes.at(i, j);
        sum += row[j];
      }
      if (sum <= 0.0) {
        dead_end = true;
        break;
      }
      for (auto& r : row) r /= sum;

      const double u = rng.next_unit();
      std::size_t pick = world_size;
      double cumulative = 0.0;
      for (std::size_t j = 0; j < world_size; ++j) {
        if (row[j] <= 0.0) continue;
        pick = j;  // last positive entry absorbs rounding at the top end
        cumulative += row[j];
        if (u < cumulative) break;
      }
      dest_list.push_back(pick);
      taken[pick] = true;
    }
    if (!dead_end) return DestinationMap(std::move(dest_list));
  }
  throw Error(ErrorCode::kTopologyFailure,
              "no derangement found after " + std::to_string(kMaxTopologyRestarts) + " draws");
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t exponential_peer(std::size_t rank, std::size_t round, std::size_t world_size) {
  if (world_size < 2 || !is_power_of_two(world_size)) {
    throw Error(ErrorCode::kUnsupportedTopology,
                "exponential graph needs a power-of-two world size >= 2, got " +
                    std::to_string(world_size));
  }
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < world_size) ++log2n;
  const std::size_t offset = std::size_t{1} << (round % log2n);
  return (rank + offset) % world_size;
}

std::pair<std::size_t, std::size_t> ring_neighbors(std::size_t rank, std::size_t world_size) {
  if (world_size < 2) {
    throw Error(ErrorCode::kInvalidWorld, "ring needs at least 2 ranks");
  }
  return {(rank + world_size - 1) % world_size, (rank + 1) % world_size};
}

}  // namespace crossover
