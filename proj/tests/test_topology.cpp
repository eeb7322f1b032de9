#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "crossover/error.hpp"
#include "crossover/rng.hpp"
#include "crossover/topology.hpp"

using namespace crossover;

namespace {

using Assignment = std::vector<std::size_t>;

// Walks every branch of the sequential draw with uniform roulettes and
// exact branch probabilities. Dead-end mass is returned separately; the
// restart rule turns the rest into a conditional distribution.
void enumerate(std::size_t n, Assignment& partial, double prob,
               std::map<Assignment, double>& complete, double& dead) {
  const std::size_t i = partial.size();
  if (i == n) {
    complete[partial] += prob;
    return;
  }
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i && std::find(partial.begin(), partial.end(), j) == partial.end()) {
      support.push_back(j);
    }
  }
  if (support.empty()) {
    dead += prob;
    return;
  }
  for (std::size_t j : support) {
    partial.push_back(j);
    enumerate(n, partial, prob / static_cast<double>(support.size()), complete, dead);
    partial.pop_back();
  }
}

std::map<Assignment, double> restart_distribution(std::size_t n) {
  std::map<Assignment, double> complete;
  double dead = 0.0;
  Assignment partial;
  enumerate(n, partial, 1.0, complete, dead);
  for (auto& [a, p] : complete) p /= (1.0 - dead);
  return complete;
}

bool is_derangement(const DestinationMap& m) {
  std::set<std::size_t> seen;
  for (std::size_t r = 0; r < m.world_size(); ++r) {
    if (m.sender_of(r) == r) return false;
    seen.insert(m.sender_of(r));
  }
  return seen.size() == m.world_size();
}

}  // namespace

TEST_CASE("SplitMix64 reference outputs") {
  // Published reference stream for seed 0.
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xe220a8397b1dcdafULL);
  CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
  CHECK(rng.next() == 0x06c45d188009454fULL);
}

TEST_CASE("init_roulettes") {
  SUBCASE("two ranks") {
    const auto r = init_roulettes(2);
    CHECK(r.at(0, 0) == 0.0);
    CHECK(r.at(0, 1) == 1.0);
    CHECK(r.at(1, 0) == 1.0);
    CHECK(r.at(1, 1) == 0.0);
  }
  SUBCASE("three ranks") {
    const auto r = init_roulettes(3);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(r.at(i, j) == (i == j ? 0.0 : 0.5));
    }
  }
  SUBCASE("rows are stochastic for larger worlds") {
    for (std::size_t n : {5u, 7u, 32u}) {
      const auto r = init_roulettes(n);
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += r.at(i, j);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(r.at(i, i) == 0.0);
      }
    }
  }
  SUBCASE("single rank is rejected") {
    try {
      init_roulettes(1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidWorld);
    }
  }
  SUBCASE("custom tables are validated") {
    CHECK_THROWS_AS(RouletteMatrix(2, {0.5, 0.5, 1.0, 0.0}), Error);  // nonzero diagonal
    CHECK_THROWS_AS(RouletteMatrix(2, {0.0, 0.9, 1.0, 0.0}), Error);  // row sum
    CHECK_NOTHROW(RouletteMatrix(2, {0.0, 1.0, 1.0, 0.0}));
  }
}

TEST_CASE("select_destinations with two ranks is the swap") {
  const auto r = init_roulettes(2);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = select_destinations(seed, 2, r);
    CHECK(m.sender_of(0) == 1);
    CHECK(m.sender_of(1) == 0);
  }
}

TEST_CASE("select_destinations is deterministic and always a derangement") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {2u, 3u, 4u, 5u, 8u, 17u, 32u, 64u}) {
    const auto r = init_roulettes(n);
    for (int t = 0; t < 200; ++t) {
      const std::uint64_t seed = rng();
      const auto a = select_destinations(seed, n, r);
      const auto b = select_destinations(seed, n, r);
      CHECK(a == b);
      CHECK(is_derangement(a));
      for (std::size_t s = 0; s < n; ++s) CHECK(a.sender_of(a.receiver_of(s)) == s);
    }
  }
}

TEST_CASE("branch enumeration of the sequential draw at n=3") {
  const auto dist = restart_distribution(3);
  REQUIRE(dist.size() == 2);
  // (0<-1, 1<-2, 2<-0): rank 0 picks 1 (1/2) then rank 1 picks 2 (1/2).
  // (0<-2, 1<-0, 2<-1): rank 0 picks 2 (1/2), the rest is forced.
  // (0 picks 1, 1 picks 0) dead-ends with mass 1/4 and restarts.
  CHECK(dist.at({1, 2, 0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(dist.at({2, 0, 1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("empirical derangement law matches enumeration") {
  for (std::size_t n : {3u, 4u}) {
    const auto oracle = restart_distribution(n);
    const auto r = init_roulettes(n);
    std::map<Assignment, int> counts;
    const int draws = 30'000;
    for (int t = 0; t < draws; ++t) {
      counts[select_destinations(derive_seed(2024, static_cast<std::uint64_t>(t), 0), n, r)
                 .senders()]++;
    }
    CHECK(counts.size() == oracle.size());
    for (const auto& [assignment, p] : oracle) {
      const double freq = static_cast<double>(counts[assignment]) / draws;
      CHECK(std::abs(freq - p) <= 0.02);
    }
  }
}

TEST_CASE("derive_seed") {
  std::mt19937_64 rng(99);
  std::set<std::uint64_t> segs, rounds, domains;
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t s = rng();
    CHECK(derive_seed(s, 5, 2) == derive_seed(s, 5, 2));
    CHECK(derive_seed(s, 7, 0) != derive_seed(s, 7, 1));
    CHECK(derive_seed(s, 0, 3) != derive_seed(s, 1, 3));
    CHECK(derive_seed(s, 4, 4, SeedDomain::kFlat) != derive_seed(s, 4, 4, SeedDomain::kLeaders));
    segs.insert(derive_seed(s, 7, 0));
    segs.insert(derive_seed(s, 7, 1));
    rounds.insert(derive_seed(s, 0, 3));
    rounds.insert(derive_seed(s, 1, 3));
  }
  CHECK(segs.size() == 2000);
  CHECK(rounds.size() == 2000);

  // Avalanche: flipping one input bit flips about half the output bits.
  double flipped = 0.0;
  int trials = 0;
  for (int t = 0; t < 200; ++t) {
    const std::uint64_t s = rng();
    for (int bit = 0; bit < 64; bit += 7) {
      flipped += __builtin_popcountll(derive_seed(s, 3, 1) ^ derive_seed(s ^ (1ULL << bit), 3, 1));
      ++trials;
    }
  }
  CHECK(flipped / trials == doctest::Approx(32.0).epsilon(0.05));
}

TEST_CASE("exponential_peer") {
  CHECK(exponential_peer(0, 0, 8) == 1);
  CHECK(exponential_peer(0, 1, 8) == 2);
  CHECK(exponential_peer(0, 2, 8) == 4);
  CHECK(exponential_peer(5, 3, 8) == 6);
  CHECK(exponential_peer(7, 2, 8) == 3);
  CHECK(exponential_peer(1, 0, 2) == 0);
  try {
    exponential_peer(0, 0, 6);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedTopology);
  }

  // Sums of distinct offsets {1, 2, ..., n/2} reach every rank.
  for (std::size_t n : {2u, 4u, 8u, 16u, 32u}) {
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t rank = 0; rank < n; ++rank) {
      std::set<std::size_t> reach{rank};
      for (std::size_t round = 0; round < log2n; ++round) {
        std::set<std::size_t> next = reach;
        for (std::size_t r : reach) next.insert(exponential_peer(r, round, n));
        reach = next;
      }
      CHECK(reach.size() == n);
    }
  }
}

TEST_CASE("ring_neighbors") {
  CHECK(ring_neighbors(0, 4) == std::pair<std::size_t, std::size_t>{3, 1});
  CHECK(ring_neighbors(3, 4) == std::pair<std::size_t, std::size_t>{2, 0});
  CHECK(ring_neighbors(0, 2) == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(ring_neighbors(1, 2) == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK_THROWS_AS(ring_neighbors(0, 1), Error);
}

TEST_CASE("DestinationMap rejects non-derangements") {
  CHECK_THROWS_AS(DestinationMap({0, 1}), Error);
  CHECK_THROWS_AS(DestinationMap({1, 1, 0}), Error);
  CHECK_NOTHROW(DestinationMap({1, 2, 0}));
}
