#include <doctest.h>

#include <cmath>
#include <random>

#include "crossover/error.hpp"
#include "crossover/optimizer.hpp"
#include "test_util.hpp"

using namespace crossover;

namespace {

OptimizerConfig plain(double lr) {
  OptimizerConfig cfg;
  cfg.base_lr = lr;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.0;
  cfg.warmup_epochs = 0;
  return cfg;
}

WorkerState scalar_state(double w) {
  return WorkerState::fresh(0, ParamVector(Layout::even_split(1, 1), {w}));
}

}  // namespace

TEST_CASE("reference hyperparameters") {
  CHECK(reference::kLarsCoeff == 0.0025);
  CHECK(reference::kLearningRate == 9.0);
  CHECK(reference::kMomentum == 0.96);
  CHECK(reference::kWeightDecay == 5e-5);
  CHECK(reference::kWarmupEpochs == 36);
  CHECK(reference::kCommInterval == 42);
}

TEST_CASE("lars_local_lr") {
  OptimizerConfig cfg;
  cfg.lars_coeff = 0.0025;
  cfg.weight_decay = 0.0;
  cfg.epsilon = 0.0;
  CHECK(lars_local_lr(0.0, 3.0, cfg) == 1.0);
  CHECK(lars_local_lr(3.0, 0.0, cfg) == 1.0);
  CHECK(lars_local_lr(1.0, 1.0, cfg) == 0.0025);

  cfg.weight_decay = 5e-5;
  cfg.epsilon = 1e-9;
  CHECK(lars_local_lr(2.0, 1.0, cfg) ==
        doctest::Approx(0.0025 * 2.0 / (1.0 + 1e-4 + 1e-9)).epsilon(1e-15));

  cfg.lars_coeff.reset();
  CHECK(lars_local_lr(2.0, 1.0, cfg) == 1.0);
}

TEST_CASE("layer_scales follow per-layer norms") {
  const auto layout = Layout::from_lengths(std::vector<std::size_t>{2, 1});
  const ParamVector w(layout, {3.0, 4.0, 0.0});
  const ParamVector g(layout, {0.0, 1.0, 2.0});
  OptimizerConfig cfg;
  cfg.lars_coeff = 0.01;
  cfg.weight_decay = 0.0;
  cfg.epsilon = 0.0;
  const auto s = layer_scales(w, g, cfg);
  CHECK(s[0] == doctest::Approx(0.01 * 5.0 / 1.0));
  CHECK(s[1] == 1.0);  // zero weight norm falls back
  cfg.lars_coeff.reset();
  CHECK(layer_scales(w, g, cfg) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("LARS step is invariant to gradient scale") {
  std::mt19937_64 rng(17);
  const auto layout = Layout::from_lengths(std::vector<std::size_t>{3, 5, 2});
  OptimizerConfig cfg = plain(0.7);
  cfg.lars_coeff = 0.0025;
  cfg.epsilon = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto w = testing::random_params(layout, rng);
    const auto g = testing::random_params(layout, rng);
    ParamVector cg = g;
    const double c = 0.1 + 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    for (auto& v : cg.values()) v *= c;
    const auto a = sgd_momentum_step(WorkerState::fresh(0, w), g, layer_scales(w, g, cfg), cfg, 0);
    const auto b =
        sgd_momentum_step(WorkerState::fresh(0, w), cg, layer_scales(w, cg, cfg), cfg, 0);
    for (std::size_t j = 0; j < w.size(); ++j) {
      CHECK(a.params[j] == doctest::Approx(b.params[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("warmup_lr") {
  OptimizerConfig cfg;
  cfg.base_lr = 0.8;
  cfg.warmup_epochs = 36;
  CHECK(warmup_lr(36.0, cfg) == 0.8);
  CHECK(warmup_lr(100.0, cfg) == 0.8);
  CHECK(warmup_lr(17.0, cfg) == doctest::Approx(0.4).epsilon(1e-15));  // (17+1)/36
  CHECK(warmup_lr(0.0, cfg) == doctest::Approx(0.8 / 36.0));
  double prev = 0.0;
  for (double e = 0.0; e < 50.0; e += 0.25) {
    CHECK(warmup_lr(e, cfg) >= prev);
    prev = warmup_lr(e, cfg);
  }
  cfg.warmup_epochs = 0;
  CHECK(warmup_lr(0.0, cfg) == 0.8);
}

TEST_CASE("sgd_momentum_step") {
  const std::vector<double> unit{1.0};
  SUBCASE("zero gradient leaves params unchanged") {
    const auto s = sgd_momentum_step(scalar_state(3.0), ParamVector(Layout::even_split(1, 1), {0.0}),
                                     unit, plain(0.1), 0);
    CHECK(s.params[0] == 3.0);
  }
  SUBCASE("vanilla step") {
    const auto s = scalar_state(1.0);
    const auto out =
        sgd_momentum_step(s, ParamVector(s.params.layout(), {1.0}), unit, plain(0.1), 0);
    CHECK(out.params[0] == doctest::Approx(0.9).epsilon(1e-15));
  }
  SUBCASE("two momentum steps against the unrolled recurrence") {
    OptimizerConfig cfg = plain(0.05);
    cfg.momentum = 0.96;
    cfg.weight_decay = 5e-5;
    const double w0 = 0.7, g1 = 0.3, g2 = -1.1, scale = 0.5;
    // m1 = g1 + wd w0;           w1 = w0 - lr s m1
    // m2 = mu m1 + g2 + wd w1;   w2 = w1 - lr s m2
    const double m1 = g1 + 5e-5 * w0;
    const double w1 = w0 - 0.05 * scale * m1;
    const double m2 = 0.96 * m1 + (g2 + 5e-5 * w1);
    const double w2 = w1 - 0.05 * scale * m2;

    const std::vector<double> scales{scale};
    auto s = scalar_state(w0);
    s = sgd_momentum_step(s, ParamVector(s.params.layout(), {g1}), scales, cfg, 0);
    s = sgd_momentum_step(s, ParamVector(s.params.layout(), {g2}), scales, cfg, 0);
    CHECK(std::abs(s.params[0] - w2) <= 1e-12);
    CHECK(std::abs(s.momentum[0] - m2) <= 1e-12);
  }
  SUBCASE("warmup scales the step") {
    OptimizerConfig cfg = plain(1.0);
    cfg.warmup_epochs = 4;
    const auto s = scalar_state(1.0);
    const auto out = sgd_momentum_step(s, ParamVector(s.params.layout(), {1.0}), unit, cfg, 1.0);
    CHECK(out.params[0] == doctest::Approx(0.5));
  }
  SUBCASE("non-finite gradient") {
    const auto s = scalar_state(1.0);
    try {
      sgd_momentum_step(s, ParamVector(s.params.layout(), {std::nan("")}), unit, plain(0.1), 0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDivergedState);
    }
  }
  SUBCASE("scale count must match layers") {
    const auto s = scalar_state(1.0);
    CHECK_THROWS_AS(sgd_momentum_step(s, ParamVector(s.params.layout(), {1.0}),
                                      std::vector<double>{1.0, 1.0}, plain(0.1), 0),
                    Error);
  }
}

TEST_CASE("accumulate_and_flush") {
  SUBCASE("interval 1 passes gradients through") {
    OptimizerConfig cfg;
    cfg.comm_interval = 1;
    auto s = scalar_state(0.0);
    for (double g : {0.1, -3.0, 7.25}) {
      auto [next, flushed] = accumulate_and_flush(s, ParamVector(s.params.layout(), {g}), cfg);
      REQUIRE(flushed);
      CHECK((*flushed)[0] == g);
      CHECK(next.accum_count == 0);
      s = next;
    }
  }
  SUBCASE("interval 42 with equal gradients emits that gradient") {
    OptimizerConfig cfg;
    cfg.comm_interval = reference::kCommInterval;
    auto s = scalar_state(0.0);
    const ParamVector g(s.params.layout(), {0.375});
    for (std::size_t k = 1; k <= 42; ++k) {
      auto [next, flushed] = accumulate_and_flush(s, g, cfg);
      s = next;
      if (k < 42) {
        CHECK(!flushed);
        CHECK(s.accum_count == k);
      } else {
        REQUIRE(flushed);
        CHECK((*flushed)[0] == 0.375);
        CHECK(s.accum_count == 0);
        CHECK(s.grad_accumulator[0] == 0.0);
      }
    }
  }
  SUBCASE("flush is the arithmetic mean") {
    OptimizerConfig cfg;
    cfg.comm_interval = 3;
    auto s = scalar_state(0.0);
    std::optional<ParamVector> out;
    for (double g : {1.0, 2.0, 6.0}) {
      auto [next, flushed] = accumulate_and_flush(s, ParamVector(s.params.layout(), {g}), cfg);
      s = next;
      out = flushed;
    }
    REQUIRE(out);
    CHECK((*out)[0] == 3.0);
  }
}

TEST_CASE("accumulated shard gradients equal the concatenated-batch gradient") {
  // Mean-squared-error linear regression: L(w) = 1/(2N) sum (x.w - y)^2,
  // grad = X^T (X w - y) / N. K equal shards of B rows.
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd;
  const std::size_t dim = 6, batch = 5;
  const auto layout = Layout::even_split(dim, 2);
  for (std::size_t shards : {1u, 3u, 42u}) {
    const std::size_t rows = shards * batch;
    std::vector<std::vector<double>> x(rows, std::vector<double>(dim));
    std::vector<double> y(rows);
    for (auto& row : x)
      for (auto& v : row) v = nd(rng);
    for (auto& v : y) v = nd(rng);
    std::vector<double> w(dim);
    for (auto& v : w) v = nd(rng);

    auto grad_rows = [&](std::size_t begin, std::size_t end) {
      std::vector<double> g(dim, 0.0);
      for (std::size_t r = begin; r < end; ++r) {
        double pred = 0.0;
        for (std::size_t j = 0; j < dim; ++j) pred += x[r][j] * w[j];
        for (std::size_t j = 0; j < dim; ++j) g[j] += (pred - y[r]) * x[r][j];
      }
      for (auto& v : g) v /= static_cast<double>(end - begin);
      return g;
    };
    const auto full = grad_rows(0, rows);

    OptimizerConfig cfg;
    cfg.comm_interval = shards;
    auto s = WorkerState::fresh(0, ParamVector(layout, w));
    std::optional<ParamVector> flushed;
    for (std::size_t k = 0; k < shards; ++k) {
      auto [next, out] =
          accumulate_and_flush(s, ParamVector(layout, grad_rows(k * batch, (k + 1) * batch)), cfg);
      s = next;
      flushed = out;
    }
    REQUIRE(flushed);
    for (std::size_t j = 0; j < dim; ++j) CHECK(std::abs((*flushed)[j] - full[j]) <= 1e-12);
  }
}

TEST_CASE("OptimizerConfig validation") {
  OptimizerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.comm_interval = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.base_lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
