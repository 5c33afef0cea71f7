#include <doctest.h>

#include <cmath>
#include <limits>

#include "fd_oracle.hpp"
#include "penalearn/errors.hpp"
#include "penalearn/trainer.hpp"

using namespace penalearn;

namespace {

TrainConfig quick_config(int epochs, std::size_t samples, std::size_t batch) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.sample_count = samples;
  cfg.batch_size = batch;
  cfg.log_every = std::max(1, epochs / 4);
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  const auto spec = make_problem("rosenbrock-1c");
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(spec, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 2000;
  CHECK_THROWS_AS(cfg.validate(spec), ConfigError);
  cfg = TrainConfig{};
  cfg.net_shape = {5, 10, 2};
  CHECK_THROWS_AS(cfg.validate(spec), ConfigError);
  cfg = TrainConfig{};
  cfg.penalty.gamma = 0.5;
  CHECK_THROWS_AS(cfg.validate(spec), ConfigError);
  CHECK_NOTHROW(TrainConfig{}.validate(spec));
}

TEST_CASE("convex toy problem trains without a penalty") {
  const auto spec = make_quadratic_problem();
  TrainConfig cfg = quick_config(200, 200, 20);
  cfg.penalty.mode = PenaltyMode::none;
  const TrainResult result = train(spec, cfg);
  REQUIRE(result.log.front().epoch == 0);
  REQUIRE(result.log.back().epoch == 200);
  CHECK(result.log.back().mean_loss <= 0.1 * result.log.front().mean_loss);
  CHECK(result.net.layer_sizes() == std::vector<int>{1, 8, 1});
}

TEST_CASE("log bookkeeping and seed determinism") {
  const auto spec = make_problem("rosenbrock-1c");
  const TrainConfig cfg = quick_config(40, 200, 50);
  const TrainResult a = train(spec, cfg);
  const TrainResult b = train(spec, cfg);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].epoch == b.log[i].epoch);
    CHECK(a.log[i].mean_loss == b.log[i].mean_loss);
    CHECK(a.log[i].feasible_frac == b.log[i].feasible_frac);
    CHECK(a.log[i].mean_loss ==
          doctest::Approx(a.log[i].mean_objective + a.log[i].mean_penalty).epsilon(1e-9));
    if (i > 0) CHECK(a.log[i].epoch > a.log[i - 1].epoch);
  }
  CHECK(a.net.params().flatten() == b.net.params().flatten());
  TrainConfig other = cfg;
  other.seed = 4;
  CHECK(train(spec, other).net.params().flatten() != a.net.params().flatten());
}

TEST_CASE("full-batch epoch is one ADAM step on the mean-loss gradient") {
  const auto spec = make_problem("rosenbrock-1c");
  TrainConfig cfg = quick_config(1, 64, 64);
  cfg.normalize_inputs = false;
  cfg.grad_clip = 0.0;
  cfg.penalty = PenaltyConfig::uniform(1e8, 2.0);
  const ParamSet samples = sample_params(spec, 64, 9);
  const Mlp start = Mlp::xavier(spec.default_net_shape, 9);

  const TrainResult trained = train_from(spec, cfg, start, samples);

  Mlp manual = start;
  AdamState state = AdamState::for_network(manual);
  const BatchGradient bg = batch_gradient(manual, spec, samples.values, cfg.penalty);
  adam_step(manual, state, bg.grads);
  const auto a = trained.net.params().flatten();
  const auto b = manual.params().flatten();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));

  // The batch gradient itself against finite differences of the mean loss.
  auto mean_at = [&](const std::vector<double>& flat) {
    Mlp probe = start;
    probe.mutable_params().assign_flat(flat);
    return mean_loss(probe, spec, samples.values, cfg.penalty, 0.1).loss;
  };
  const auto numeric = testing::central_difference(mean_at, start.params().flatten());
  CHECK(testing::max_relative_error(bg.grads.flatten(), numeric) < 1e-5);
}

TEST_CASE("indicator penalty adds nothing to the parameter gradient") {
  // rosenbrock-3c is infeasible everywhere, so every sample is penalized.
  const auto spec = make_problem("rosenbrock-3c");
  const ParamSet samples = sample_params(spec, 32, 2);
  const Mlp net = Mlp::xavier(spec.default_net_shape, 2);
  const auto piecewise = batch_gradient(net, spec, samples.values, PenaltyConfig::uniform(1e8, 2.0));
  const auto indicator =
      batch_gradient(net, spec, samples.values, PenaltyConfig::uniform(1e8, 2.0, PenaltyMode::indicator));
  const auto bare = batch_gradient(net, spec, samples.values, PenaltyConfig::uniform(1e8, 2.0, PenaltyMode::none));
  CHECK(piecewise.mean.feasible_frac == 0.0);
  CHECK(indicator.grads.flatten() == bare.grads.flatten());
  double diff = 0.0;
  const auto pw = piecewise.grads.flatten();
  const auto nb = bare.grads.flatten();
  for (std::size_t i = 0; i < pw.size(); ++i) diff = std::max(diff, std::abs(pw[i] - nb[i]));
  CHECK(diff > 1.0);
  // Every sample violates at least one of the three constraints.
  CHECK(indicator.mean.penalty >= 1e12);
}

TEST_CASE("piecewise training keeps rosenbrock outputs feasible") {
  const auto spec = make_problem("rosenbrock-1c");
  TrainConfig cfg = quick_config(300, 1000, 100);
  const TrainResult result = train(spec, cfg);
  CHECK(result.log.back().feasible_frac >= 0.95);
}

TEST_CASE("divergence guard") {
  const auto spec = make_problem("rosenbrock-3c");
  TrainConfig cfg = quick_config(5, 100, 10);
  cfg.divergence_limit = 1.0;
  try {
    train(spec, cfg);
    FAIL("expected divergence");
  } catch (const TrainingDivergedError& e) {
    CHECK(e.epoch() == 1);
  }

  ProblemSpec nan_spec = make_quadratic_problem();
  nan_spec.objective = [](const Vec& x, const Vec& p) {
    ValueGrad out{p[0] > 0.9 ? std::numeric_limits<double>::quiet_NaN() : x[0] * x[0], Vec(1)};
    out.grad[0] = 2.0 * x[0];
    return out;
  };
  TrainConfig nan_cfg = quick_config(5, 100, 10);
  nan_cfg.penalty.mode = PenaltyMode::none;
  try {
    train(nan_spec, nan_cfg);
    FAIL("expected divergence");
  } catch (const TrainingDivergedError& e) {
    CHECK(e.sample() >= 0);
    const ParamSet samples = sample_params(nan_spec, 100, nan_cfg.seed);
    CHECK(samples.values(e.sample(), 0) > 0.9);
  }
}

TEST_CASE("input scaling folds into the first layer") {
  const auto spec = make_problem("ackley-1c");
  const InputScaling scaling = InputScaling::from_ranges(spec.param_ranges);
  const Mlp net = Mlp::xavier(spec.default_net_shape, 12);
  const Mlp folded = fold_input_scaling(net, scaling);
  const ParamSet ps = sample_params(spec, 20, 13);
  const Mat direct = mlp_forward(net, scaling.apply(ps.values)).output();
  const Mat via_fold = mlp_forward(folded, ps.values).output();
  CHECK((direct - via_fold).cwiseAbs().maxCoeff() < 1e-12);
  const Mat scaled = scaling.apply(ps.values);
  CHECK(scaled.cwiseAbs().maxCoeff() <= 1.0 + 1e-15);
}

TEST_CASE("evaluate") {
  const auto spec = make_problem("rosenbrock-1c");
  const ParamSet ps = sample_params(spec, 5, 1);
  const auto reports = evaluate(Mlp({2, 20, 20, 2}), spec, ps, PenaltyConfig{});
  REQUIRE(reports.size() == 5);
  for (const auto& r : reports) {
    CHECK(r.solution.isZero(0.0));
    CHECK(r.violation.feasible);
    CHECK(r.t_forward_ns > 0.0);
    CHECK(r.objective == doctest::Approx(r.params[1] * r.params[1]));
  }
  CHECK_THROWS_AS(evaluate(Mlp({5, 4, 2}), spec, ps, PenaltyConfig{}), DimensionError);
  const std::string csv = eval_csv(reports);
  CHECK(csv.rfind("c1,c2,x1,x2,objective,max_ineq_violation,max_eq_violation,feasible,t_forward_ns\n", 0) == 0);
}

TEST_CASE("train log csv header") {
  TrainLog log{{0, 1.0, 0.5, 0.5, 1.0, 0.0}};
  CHECK(train_log_csv(log) == "epoch,mean_loss,mean_objective,mean_penalty,feasible_frac,elapsed_s\n0,1,0.5,0.5,1,0\n");
}
