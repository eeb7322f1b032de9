#pragma once

// Peer-selection topologies. The load-balanced random topology is a
// deterministic function of a shared seed, so every worker computes the
// same assignment without exchanging messages.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace crossover {

// Row-stochastic peer-selection table with a zero diagonal. Row = sender
// candidate being assigned, column = rank it may be paired with.
class RouletteMatrix {
 public:
  // Throws kInvalidWorld for world_size < 2 and kInvalidInput when `probs`
  // is not square, has a nonzero diagonal, negative entries, or rows that do
  // not sum to 1 within 1e-12.
  RouletteMatrix(std::size_t world_size, std::vector<double> probs);

  std::size_t world_size() const { return world_size_; }
  double at(std::size_t row, std::size_t col) const { return probs_[row * world_size_ + col]; }

 private:
  std::size_t world_size_;
  std::vector<double> probs_;  // row-major
};

RouletteMatrix init_roulettes(std::size_t world_size);

// Receiver -> sender permutation without fixed points.
class DestinationMap {
 public:
  // Throws kTopologyFailure unless sender_of is a derangement of [0, n).
  explicit DestinationMap(std::vector<std::size_t> sender_of);

  std::size_t world_size() const { return sender_of_.size(); }
  // Rank whose segment `receiver` merges.
  std::size_t sender_of(std::size_t receiver) const { return sender_of_.at(receiver); }
  // Rank that merges the segment `sender` sends (the inverse permutation).
  std::size_t receiver_of(std::size_t sender) const { return receiver_of_.at(sender); }
  const std::vector<std::size_t>& senders() const { return sender_of_; }

  bool operator==(const DestinationMap& other) const { return sender_of_ == other.sender_of_; }

 private:
  std::vector<std::size_t> sender_of_;
  std::vector<std::size_t> receiver_of_;
};

// Domain tags keep topologies drawn for different purposes independent.
enum class SeedDomain : std::uint64_t {
  kFlat = 0,
  kLeaders = 1,
  kTask = 2,
};

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t round, std::uint64_t segment_index,
                          SeedDomain domain = SeedDomain::kFlat);

inline constexpr std::size_t kMaxTopologyRestarts = 10'000;

// Sequential roulette-wheel draw: rank i picks among ranks not yet picked
// and not itself, with probabilities taken from row i of `roulettes`
// renormalized over that support. A rank left with an empty support
// discards the partial assignment and the draw restarts, continuing the
// same seeded stream.
DestinationMap select_destinations(std::uint64_t seed, std::size_t world_size,
                                   const RouletteMatrix& roulettes);

bool is_power_of_two(std::size_t n);

// Directed exponential graph: offset 2^(round mod log2 n).
std::size_t exponential_peer(std::size_t rank, std::size_t round, std::size_t world_size);

// (left, right) on a bidirectional ring.
std::pair<std::size_t, std::size_t> ring_neighbors(std::size_t rank, std::size_t world_size);

}  // namespace crossover
