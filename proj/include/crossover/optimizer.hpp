#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "crossover/model_core.hpp"
#include "crossover/worker_state.hpp"

namespace crossover {

struct OptimizerConfig {
  double base_lr = 0.005;
  double momentum = 0.96;
  double weight_decay = 5e-5;
  // LARS trust coefficient; nullopt disables layer-wise scaling.
  std::optional<double> lars_coeff;
  std::size_t warmup_epochs = 0;
  std::size_t comm_interval = 1;
  double epsilon = 1e-9;

  // Throws kInvalidInput if any field is out of range.
  void validate() const;
};

// Large-batch ImageNet operating point these defaults were taken from.
// Kept for reference; the learning rate is only meaningful with LARS on a
// deep network and is not used by the simulator's defaults.
namespace reference {
inline constexpr double kLarsCoeff = 0.0025;
inline constexpr double kLearningRate = 9.0;
inline constexpr double kMomentum = 0.96;
inline constexpr double kWeightDecay = 5e-5;
inline constexpr std::size_t kWarmupEpochs = 36;
inline constexpr std::size_t kTrainingEpochs = 90;
inline constexpr std::size_t kCommInterval = 42;
}  // namespace reference

// lars_coeff * |w| / (|g| + weight_decay * |w| + epsilon), or 1 when either
// norm is zero or LARS is disabled.
double lars_local_lr(double weight_norm, double grad_norm, const OptimizerConfig& cfg);

// One scale per layer of `params`.
std::vector<double> layer_scales(const ParamVector& params, const ParamVector& grad,
                                 const OptimizerConfig& cfg);

// Linear ramp base_lr * min(1, (epoch + 1) / warmup_epochs).
double warmup_lr(double epoch, const OptimizerConfig& cfg);

// Per layer l: m = momentum * m + (g + wd * w);  w -= lr(epoch) * scale_l * m.
// Throws kDivergedState on a non-finite gradient or result.
WorkerState sgd_momentum_step(WorkerState state, const ParamVector& grad,
                              std::span<const double> per_layer_scales, const OptimizerConfig& cfg,
                              double epoch);

// Adds `grad` to the accumulator. Every comm_interval calls the mean of the
// accumulated gradients is returned and the accumulator is reset.
std::pair<WorkerState, std::optional<ParamVector>> accumulate_and_flush(
    WorkerState state, const ParamVector& grad, const OptimizerConfig& cfg);

}  // namespace crossover
