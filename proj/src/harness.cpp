#include "crossover/harness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crossover/baselines.hpp"
#include "crossover/gossip_engine.hpp"
#include "crossover/hierarchical.hpp"
#include "crossover/rng.hpp"
#include "crossover/topology.hpp"

namespace crossover {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kCrossover: return "crossover";
    case Method::kHierCrossover: return "hier-crossover";
    case Method::kSgpPushsum: return "sgp-pushsum";
    case Method::kRing: return "ring";
    case Method::kAllreduce: return "allreduce";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidMethod, "unknown method '" + std::string(name) + "'");
}

void LinkModel::validate() const {
  if (!(latency >= 0.0) || !std::isfinite(latency)) {
    throw Error(ErrorCode::kInvalidInput, "latency must be nonnegative");
  }
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorCode::kInvalidInput, "bandwidth must be positive");
  }
  if (element_size != 2 && element_size != 4 && element_size != 8) {
    throw Error(ErrorCode::kInvalidInput, "element_size must be 2, 4 or 8");
  }
}

LinkModel LinkModel::neuron() { return LinkModel{2e-6, 56000e6 / 8.0, 4}; }

LinkModel LinkModel::aws() { return LinkModel{50e-6, 3125e6 / 8.0, 4}; }

double ring_allreduce_time(std::size_t model_bytes, std::size_t world_size, const LinkModel& link) {
  if (world_size < 2) return 0.0;
  const double n = static_cast<double>(world_size);
  return 2.0 * (n - 1.0) * link.latency +
         2.0 * ((n - 1.0) / n) * static_cast<double>(model_bytes) / link.bandwidth;
}

double simulate_round_time(Method method, std::size_t model_bytes, std::size_t segment_count,
                           std::size_t world_size, std::size_t group_size, const LinkModel& link,
                           const CostOptions& options) {
  if (model_bytes == 0) throw Error(ErrorCode::kInvalidInput, "model_bytes must be positive");
  link.validate();
  // Overlapped sends share one NIC: one latency, whole model over the link.
  const double transfer = link.latency + static_cast<double>(model_bytes) / link.bandwidth;
  const double topology =
      options.topology_overhead * static_cast<double>(std::max<std::size_t>(segment_count, 1));
  switch (method) {
    case Method::kAllreduce:
      return ring_allreduce_time(model_bytes, world_size, link);
    case Method::kCrossover:
      return transfer + topology;
    case Method::kSgpPushsum:
    case Method::kRing:
      return transfer;
    case Method::kHierCrossover: {
      if (group_size == 0 || group_size > world_size) {
        throw Error(ErrorCode::kInvalidGroup, "group size out of range");
      }
      const std::size_t leaders = (world_size + group_size - 1) / group_size;
      const std::size_t largest = (world_size + leaders - 1) / leaders;
      double t = ring_allreduce_time(model_bytes, largest, link);
      if (leaders >= 2) t += transfer + topology;
      if (largest >= 2) t += transfer;  // broadcast back to members
      return t;
    }
  }
  throw Error(ErrorCode::kInvalidMethod, "unknown method");
}

QuadraticTask make_quadratic_task(std::size_t world_size, const LayoutPtr& layout,
                                  std::uint64_t seed, const TaskShape& shape) {
  SplitMix64 rng(derive_seed(seed, 0, 0, SeedDomain::kTask));
  const std::size_t dim = layout->total_size();
  std::vector<double> base(dim);
  for (auto& b : base) b = 0.5 + rng.next_unit();

  QuadraticTask task;
  for (std::size_t i = 0; i < world_size; ++i) {
    ParamVector a = ParamVector::zeros(layout);
    ParamVector d = ParamVector::zeros(layout);
    for (std::size_t j = 0; j < dim; ++j) {
      a[j] = shape.target_spread * (2.0 * rng.next_unit() - 1.0);
      d[j] = base[j] * (1.0 + shape.curvature_spread * (2.0 * rng.next_unit() - 1.0));
    }
    task.targets.push_back(std::move(a));
    task.scales.push_back(std::move(d));
  }
  return task;
}

ParamVector quadratic_grad(const QuadraticTask& task, std::size_t rank, const ParamVector& x) {
  if (rank >= task.world_size()) {
    throw Error(ErrorCode::kInvalidInput, "rank " + std::to_string(rank) + " out of range");
  }
  const auto& a = task.targets[rank];
  const auto& d = task.scales[rank];
  if (!x.conforms_to(a)) throw Error(ErrorCode::kCorruptState, "x does not match task layout");
  ParamVector g = ParamVector::zeros(x.layout());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = d[j] * (x[j] - a[j]);
  return g;
}

ParamVector quadratic_optimum(const QuadraticTask& task) {
  ParamVector num = ParamVector::zeros(task.targets.front().layout());
  ParamVector den = num;
  for (std::size_t i = 0; i < task.world_size(); ++i) {
    for (std::size_t j = 0; j < num.size(); ++j) {
      num[j] += task.scales[i][j] * task.targets[i][j];
      den[j] += task.scales[i][j];
    }
  }
  for (std::size_t j = 0; j < num.size(); ++j) num[j] /= den[j];
  return num;
}

double global_loss(const QuadraticTask& task, std::span<const double> x) {
  double total = 0.0;
  for (std::size_t i = 0; i < task.world_size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double r = x[j] - task.targets[i][j];
      total += 0.5 * task.scales[i][j] * r * r;
    }
  }
  return total / static_cast<double>(task.world_size());
}

void TrainConfig::validate() const {
  optimizer.validate();
  link.validate();
  if (workers < 2) throw Error(ErrorCode::kInvalidWorld, "workers must be at least 2");
  if (dim < layers) throw Error(ErrorCode::kInvalidPlan, "dim must be at least layers");
  if (layers < 1) throw Error(ErrorCode::kInvalidPlan, "layers must be at least 1");
  if (segments < 1 || segments > layers) {
    throw Error(ErrorCode::kInvalidPlan, "segments must lie in [1, layers]");
  }
  if (rounds_per_epoch < 1) throw Error(ErrorCode::kInvalidInput, "rounds_per_epoch must be >= 1");
  if (!(cost.topology_overhead >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "topology overhead must be nonnegative");
  }
  if (method == Method::kSgpPushsum && !is_power_of_two(workers)) {
    throw Error(ErrorCode::kUnsupportedTopology,
                "sgp-pushsum needs a power-of-two worker count (exponential graph), got " +
                    std::to_string(workers));
  }
  if (method == Method::kHierCrossover && (group_size < 1 || group_size > workers)) {
    throw Error(ErrorCode::kInvalidGroup, "group_size must lie in [1, workers]");
  }
}

namespace {

struct Traffic {
  std::size_t max = 0;
  std::size_t min = 0;
};

Traffic summarize(const std::vector<std::size_t>& bytes) {
  const auto [lo, hi] = std::minmax_element(bytes.begin(), bytes.end());
  return {*hi, *lo};
}

std::vector<WorkerState> step_all(std::vector<WorkerState> states,
                                  const std::vector<ParamVector>& grads,
                                  const OptimizerConfig& cfg, double epoch) {
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto scales = layer_scales(states[i].params, grads[i], cfg);
    states[i] = sgd_momentum_step(std::move(states[i]), grads[i], scales, cfg, epoch);
  }
  return states;
}

}  // namespace

TrainResult train(const TrainConfig& config) {
  config.validate();
  const std::size_t n = config.workers;
  const LayoutPtr layout = Layout::even_split(config.dim, config.layers);
  const SegmentPlan plan = build_segment_plan(layout, config.segments);
  const QuadraticTask task = make_quadratic_task(n, layout, config.seed, config.task);
  const std::size_t model_bytes = config.dim * config.link.element_size;
  const GroupLayout groups =
      build_groups(n, config.method == Method::kHierCrossover ? config.group_size : 1);

  TrainResult result;
  result.optimum_loss = global_loss(task, quadratic_optimum(task).values());

  // Data-parallel workers start from one shared initialization.
  SplitMix64 init_rng(derive_seed(config.seed, 0, 1, SeedDomain::kTask));
  ParamVector x0 = ParamVector::zeros(layout);
  for (auto& v : x0.values()) v = 2.0 * init_rng.next_unit() - 1.0;
  std::vector<WorkerState> states;
  for (std::size_t i = 0; i < n; ++i) states.push_back(WorkerState::fresh(i, x0));

  const double round_time =
      simulate_round_time(config.method, model_bytes, plan.num_segments(), n,
                          config.method == Method::kHierCrossover ? config.group_size : 1,
                          config.link, config.cost);
  double sim_time = 0.0;

  try {
    for (std::size_t round = 0; round < config.rounds; ++round) {
      const double epoch =
          static_cast<double>(round) / static_cast<double>(config.rounds_per_epoch);

      std::vector<ParamVector> grads(n);
      for (std::size_t micro = 0; micro < config.optimizer.comm_interval; ++micro) {
        for (std::size_t i = 0; i < n; ++i) {
          const ParamVector g = quadratic_grad(task, i, states[i].params);
          auto [next, flushed] = accumulate_and_flush(std::move(states[i]), g, config.optimizer);
          states[i] = std::move(next);
          if (flushed) grads[i] = std::move(*flushed);
        }
      }

      std::vector<std::size_t> bytes(n, 0);
      switch (config.method) {
        case Method::kCrossover: {
          states = step_all(std::move(states), grads, config.optimizer, epoch);
          const RoundPlan rp = plan_round(n, plan, round, config.seed);
          states = crossover_round(states, plan, rp);
          bytes = crossover_traffic(plan, rp, config.link.element_size).bytes_sent;
          break;
        }
        case Method::kRing: {
          states = step_all(std::move(states), grads, config.optimizer, epoch);
          states = ring_round(states);
          bytes.assign(n, 2 * model_bytes);
          break;
        }
        case Method::kAllreduce: {
          states = step_all(std::move(states), grads, config.optimizer, epoch);
          states = allreduce_average(states);
          bytes = ring_allreduce_bytes(n, config.dim, config.link.element_size);
          break;
        }
        case Method::kSgpPushsum: {
          // params hold the de-biased estimate; gradients are taken there.
          states = step_all(std::move(states), grads, config.optimizer, epoch);
          std::vector<PushSumPair> pairs;
          pairs.reserve(n);
          for (const auto& s : states) {
            PushSumPair p{s.params, s.pushsum_weight};
            for (auto& v : p.value.values()) v *= s.pushsum_weight;
            pairs.push_back(std::move(p));
          }
          pairs = pushsum_round(pairs, round);
          for (std::size_t i = 0; i < n; ++i) {
            states[i].pushsum_weight = pairs[i].weight;
            states[i].params = pairs[i].debiased();
          }
          bytes.assign(n, model_bytes);
          break;
        }
        case Method::kHierCrossover: {
          states = hierarchical_round(states, grads, groups, plan,
                                      HierarchicalStep{epoch, round, config.seed},
                                      config.optimizer);
          for (std::size_t g = 0; g < groups.num_groups(); ++g) {
            const auto& members = groups.groups[g];
            const auto intra =
                ring_allreduce_bytes(members.size(), config.dim, config.link.element_size);
            for (std::size_t m = 0; m < members.size(); ++m) bytes[members[m]] += intra[m];
            if (groups.num_groups() >= 2) bytes[groups.leaders[g]] += model_bytes;
            if (members.size() >= 2) bytes[groups.leaders[g]] += model_bytes;
          }
          break;
        }
      }

      sim_time += round_time;
      const auto mean = coordinate_mean(states);
      const Traffic t = summarize(bytes);
      result.records.push_back(MetricsRecord{round + 1, sim_time, global_loss(task, mean),
                                             consensus_distance(states), t.max, t.min});
      if (!std::isfinite(result.records.back().global_loss)) {
        throw Error(ErrorCode::kDivergedState,
                    "loss is not finite after round " + std::to_string(round + 1));
      }
    }
  } catch (const Error& e) {
    result.failure = e;
  }
  return result;
}

}  // namespace crossover
