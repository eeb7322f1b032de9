#pragma once

// Deterministic simulated cluster: a heterogeneous quadratic stands in for
// the training task, a closed-form cost model stands in for the network, and
// train() runs the round loop for any of the supported protocols.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crossover/error.hpp"
#include "crossover/model_core.hpp"
#include "crossover/optimizer.hpp"

namespace crossover {

enum class Method {
  kCrossover,
  kHierCrossover,
  kSgpPushsum,
  kRing,
  kAllreduce,
};

inline constexpr Method kAllMethods[] = {Method::kCrossover, Method::kHierCrossover,
                                         Method::kSgpPushsum, Method::kRing, Method::kAllreduce};

std::string_view to_string(Method m);
// Throws kInvalidMethod for an unknown name.
Method parse_method(std::string_view name);

struct LinkModel {
  double latency = 50e-6;       // seconds per message
  double bandwidth = 390.625e6;  // bytes per second
  std::size_t element_size = 4;  // bytes per parameter element

  // Throws kInvalidInput on negative latency, nonpositive bandwidth or an
  // element size outside {2, 4, 8}.
  void validate() const;

  // InfiniBand cluster, 56000 Mb/s.
  static LinkModel neuron();
  // Cloud instance, up to 3125 Mb/s.
  static LinkModel aws();
};

// Parameters of the communication-time model that are not properties of
// the link itself.
struct CostOptions {
  // Seconds charged per segment for drawing the random topology.
  double topology_overhead = 0.0;
};

// Simulated wall-clock of one communication round for `method`.
double simulate_round_time(Method method, std::size_t model_bytes, std::size_t segment_count,
                           std::size_t world_size, std::size_t group_size, const LinkModel& link,
                           const CostOptions& options = {});

double ring_allreduce_time(std::size_t model_bytes, std::size_t world_size, const LinkModel& link);

// f_i(x) = 1/2 sum_j scales[i][j] * (x[j] - targets[i][j])^2
struct QuadraticTask {
  std::vector<ParamVector> targets;
  std::vector<ParamVector> scales;

  std::size_t world_size() const { return targets.size(); }
};

struct TaskShape {
  double target_spread = 1.0;    // targets uniform in [-spread, spread]
  double curvature_spread = 0.1;  // per-worker relative jitter of the scales
};

// Scales are a shared base curvature in [0.5, 1.5] per coordinate, jittered
// per worker by a factor in [1 - curvature_spread, 1 + curvature_spread].
QuadraticTask make_quadratic_task(std::size_t world_size, const LayoutPtr& layout,
                                  std::uint64_t seed, const TaskShape& shape = {});

ParamVector quadratic_grad(const QuadraticTask& task, std::size_t rank, const ParamVector& x);

// Minimizer of (1/n) sum_i f_i.
ParamVector quadratic_optimum(const QuadraticTask& task);

// (1/n) sum_i f_i(x)
double global_loss(const QuadraticTask& task, std::span<const double> x);

struct MetricsRecord {
  std::size_t round = 0;
  double sim_time = 0.0;
  double global_loss = 0.0;
  double consensus = 0.0;
  std::size_t bytes_max = 0;
  std::size_t bytes_min = 0;

  bool operator==(const MetricsRecord&) const = default;
};

struct TrainConfig {
  Method method = Method::kCrossover;
  std::size_t workers = 8;
  std::size_t segments = 4;
  std::size_t layers = 8;
  std::size_t dim = 64;
  std::size_t rounds = 500;
  std::uint64_t seed = 42;
  std::size_t group_size = 2;
  std::size_t rounds_per_epoch = 10;
  OptimizerConfig optimizer;
  LinkModel link;
  CostOptions cost;
  TaskShape task;

  // Throws kInvalidInput (or a more specific code) when the combination
  // cannot run, e.g. push-sum with a non-power-of-two worker count.
  void validate() const;
};

struct TrainResult {
  std::vector<MetricsRecord> records;
  // Set when the run aborted; records hold every completed round.
  std::optional<Error> failure;
  double optimum_loss = 0.0;
};

// One record per communication round. A round is comm_interval gradient
// evaluations accumulated locally, one optimizer step, then one protocol
// exchange. Fully determined by the config.
TrainResult train(const TrainConfig& config);

}  // namespace crossover
