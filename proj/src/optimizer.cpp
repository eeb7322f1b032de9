#include "crossover/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crossover/error.hpp"

namespace crossover {

void OptimizerConfig::validate() const {
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
    throw Error(ErrorCode::kInvalidInput, "base_lr must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw Error(ErrorCode::kInvalidInput, "weight_decay must be nonnegative");
  }
  if (lars_coeff && (!(*lars_coeff >= 0.0) || !std::isfinite(*lars_coeff))) {
    throw Error(ErrorCode::kInvalidInput, "lars_coeff must be nonnegative");
  }
  if (comm_interval < 1) {
    throw Error(ErrorCode::kInvalidInput, "comm_interval must be at least 1");
  }
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "epsilon must be nonnegative");
  }
}

double lars_local_lr(double weight_norm, double grad_norm, const OptimizerConfig& cfg) {
  if (!cfg.lars_coeff || weight_norm == 0.0 || grad_norm == 0.0) return 1.0;
  return *cfg.lars_coeff * weight_norm /
         (grad_norm + cfg.weight_decay * weight_norm + cfg.epsilon);
}

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> layer_scales(const ParamVector& params, const ParamVector& grad,
                                 const OptimizerConfig& cfg) {
  if (!params.conforms_to(grad)) {
    throw Error(ErrorCode::kCorruptState, "gradient layout does not match parameters");
  }
  const std::size_t layers = params.layout()->num_layers();
  std::vector<double> scales(layers, 1.0);
  if (!cfg.lars_coeff) return scales;
  for (std::size_t l = 0; l < layers; ++l) {
    scales[l] = lars_local_lr(norm(params.layer(l)), norm(grad.layer(l)), cfg);
  }
  return scales;
}

double warmup_lr(double epoch, const OptimizerConfig& cfg) {
  if (cfg.warmup_epochs == 0) return cfg.base_lr;
  const double ramp = (std::max(epoch, 0.0) + 1.0) / static_cast<double>(cfg.warmup_epochs);
  return cfg.base_lr * std::min(1.0, ramp);
}

WorkerState sgd_momentum_step(WorkerState state, const ParamVector& grad,
                              std::span<const double> per_layer_scales, const OptimizerConfig& cfg,
                              double epoch) {
  if (!state.params.conforms_to(grad) || !state.params.conforms_to(state.momentum)) {
    throw Error(ErrorCode::kCorruptState, "gradient layout does not match worker state");
  }
  const auto& layout = *state.params.layout();
  if (per_layer_scales.size() != layout.num_layers()) {
    throw Error(ErrorCode::kCorruptState, "expected one scale per layer");
  }
  if (!grad.all_finite()) {
    throw Error(ErrorCode::kDivergedState,
                "non-finite gradient on worker " + std::to_string(state.rank));
  }
  const double lr = warmup_lr(epoch, cfg);
  for (std::size_t l = 0; l < layout.num_layers(); ++l) {
    auto w = state.params.layer(l);
    auto m = state.momentum.layer(l);
    const auto g = grad.layer(l);
    const double step = lr * per_layer_scales[l];
    for (std::size_t e = 0; e < w.size(); ++e) {
      m[e] = cfg.momentum * m[e] + (g[e] + cfg.weight_decay * w[e]);
      w[e] -= step * m[e];
    }
  }
  if (!state.params.all_finite()) {
    throw Error(ErrorCode::kDivergedState,
                "parameters diverged on worker " + std::to_string(state.rank));
  }
  return state;
}

std::pair<WorkerState, std::optional<ParamVector>> accumulate_and_flush(
    WorkerState state, const ParamVector& grad, const OptimizerConfig& cfg) {
  if (!state.grad_accumulator.conforms_to(grad)) {
    throw Error(ErrorCode::kCorruptState, "gradient layout does not match accumulator");
  }
  auto acc = state.grad_accumulator.values();
  const auto g = grad.values();
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
  ++state.accum_count;
  if (state.accum_count < cfg.comm_interval) return {std::move(state), std::nullopt};

  ParamVector flushed = state.grad_accumulator;
  const double count = static_cast<double>(state.accum_count);
  for (auto& v : flushed.values()) v /= count;
  for (auto& v : acc) v = 0.0;
  state.accum_count = 0;
  return {std::move(state), std::move(flushed)};
}

}  // namespace crossover
