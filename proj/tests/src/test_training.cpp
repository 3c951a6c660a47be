#include <doctest.h>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncomp/errors.hpp"
#include "ncomp/model.hpp"
#include "ncomp/rng.hpp"
#include "ncomp/training.hpp"

using namespace ncomp;

namespace {

ModelConfig tiny_config(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.window = 3;
  cfg.char_gru_units = 2;
  cfg.pos_gru_units = 2;
  cfg.merged_gru_units = 2;
  cfg.dense1_units = 2;
  cfg.dropout_rho = 0.0;
  cfg.seed = seed;
  return cfg;
}

NetworkParams zeroed_params(const ModelConfig& cfg) {
  NetworkParams p = init_params(cfg);
  for_each_tensor([](auto& t) { t.setZero(); }, p);
  return p;
}

bool params_equal(const NetworkParams& a, const NetworkParams& b) {
  bool equal = true;
  for_each_tensor([&](const auto& x, const auto& y) { equal = equal && (x.array() == y.array()).all(); },
                  a, b);
  return equal;
}

double max_abs(const TensorBundle& g) {
  double m = 0.0;
  for_each_tensor([&](const auto& t) { m = std::max(m, t.cwiseAbs().maxCoeff()); }, g);
  return m;
}

WindowSample demo_sample() {
  WindowSample s;
  s.context = {104, 105, 33};
  s.tags = {12, 12, 0};
  s.target = 104;
  return s;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("cross entropy closed forms") {
  Pmf p = Pmf::Zero(kAlphabetSize);
  p[7] = 1.0;
  CHECK(cross_entropy_loss(p, 7) == 0.0);

  p.setZero();
  p[7] = 0.5;
  p[8] = 0.5;
  CHECK(cross_entropy_loss(p, 7) == doctest::Approx(0.34657359027997264).epsilon(1e-14));

  p.setConstant(1.0 / kAlphabetSize);
  CHECK(cross_entropy_loss(p, 0) == doctest::Approx(2.772588722239781).epsilon(1e-14));
}

TEST_CASE("vanishing target probability is clamped and reported") {
  Pmf p = Pmf::Zero(kAlphabetSize);
  p[0] = 1.0;
  bool clamped = false;
  const double loss = cross_entropy_loss(p, 200, &clamped);
  CHECK(clamped);
  CHECK(loss == doctest::Approx(34.538776394910684).epsilon(1e-12));  // -0.5 ln 1e-30

  p[200] = 1e-28;
  clamped = true;
  (void)cross_entropy_loss(p, 200, &clamped);
  CHECK_FALSE(clamped);
}

TEST_CASE("backward on an all-zero network reduces to the softmax delta") {
  const ModelConfig cfg = tiny_config(31);
  const NetworkParams params = zeroed_params(cfg);
  const WindowSample s = demo_sample();

  Rng rng(1);
  ForwardTrace trace;
  const Pmf pmf = forward_train(params, s.context, s.tags, PosMode::enabled, rng, trace);
  // all-zero weights give the uniform output
  CHECK(pmf.minCoeff() == doctest::Approx(1.0 / 256).epsilon(1e-12));

  const Gradients g = backward(params, trace, s.target);

  // the only nonzero gradient is at the output bias: (pmf - onehot)/2
  for (int i = 0; i < kAlphabetSize; ++i) {
    const double want = 0.5 * (pmf(i) - (i == s.target ? 1.0 : 0.0));
    CHECK(g.dense2.theta(i) == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(g.dense2.w.cwiseAbs().maxCoeff() == 0.0);  // hidden activity is zero
  CHECK(g.dense1.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.char_gru.v_h.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.merged_gru.u_z.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.pos_gru.b_r.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analytic gradients match finite differences on a tiny network") {
  const ModelConfig cfg = tiny_config(1);
  const NetworkParams params = init_params(cfg);
  const WindowSample s = demo_sample();

  const double err = grad_check(params, s, 1e-5);
  CHECK(err < 1e-4);

  const double err_ablated = grad_check(params, s, 1e-5, PosMode::ablated);
  CHECK(err_ablated < 1e-4);

  // a coarse step drowns in truncation error
  CHECK(grad_check(params, s, 0.5) > err);
}

TEST_CASE("gradient check is near exact when only the dense head is active") {
  // Frozen (all-zero) recurrent stacks pin the merged state at zero, so the
  // loss only sees the dense head; finite differences are then clean enough
  // to certify to 1e-8.
  const ModelConfig cfg = tiny_config(32);
  NetworkParams params = init_params(cfg);
  auto zero_gru = [](GruParams& g) {
    g.v_r.setZero();
    g.v_z.setZero();
    g.v_h.setZero();
    g.u_r.setZero();
    g.u_z.setZero();
    g.u_h.setZero();
    g.b_r.setZero();
    g.b_z.setZero();
    g.b_h.setZero();
  };
  zero_gru(params.char_gru);
  zero_gru(params.pos_gru);
  zero_gru(params.merged_gru);
  params.dense1.w.setZero();
  params.dense1.theta << 0.3, -0.3;  // away from the relu kink

  const double err = grad_check(params, demo_sample(), 1e-4);
  CHECK(err < 1e-8);
}

TEST_CASE("backward under pinned dropout masks") {
  ModelConfig cfg = tiny_config(33);
  cfg.dropout_rho = 0.5;  // masks below are scaled by 1/(1-rho) = 2
  const NetworkParams params = init_params(cfg);
  const WindowSample s = demo_sample();

  SUBCASE("masking a whole branch cuts all of its gradients") {
    const Eigen::MatrixXd char_mask = Eigen::MatrixXd::Zero(2, 3);
    const Eigen::MatrixXd pos_mask = Eigen::MatrixXd::Constant(2, 3, 2.0);
    ForwardTrace trace;
    (void)forward_train_with_masks(params, s.context, s.tags, PosMode::enabled, char_mask,
                                   pos_mask, trace);
    const Gradients g = backward(params, trace, s.target);

    Gradients char_only = zeros_like(params);
    char_only.char_gru = g.char_gru;
    CHECK(max_abs(char_only) == 0.0);

    Gradients pos_only = zeros_like(params);
    pos_only.pos_gru = g.pos_gru;
    CHECK(max_abs(pos_only) > 0.0);  // the surviving branch still learns
  }

  SUBCASE("gradients agree with finite differences through the masks") {
    Eigen::MatrixXd char_mask(2, 3), pos_mask(2, 3);
    char_mask << 2, 0, 2, 0, 2, 2;  // mixed survivorship per unit and step
    pos_mask << 0, 2, 2, 2, 0, 0;

    ForwardTrace trace;
    (void)forward_train_with_masks(params, s.context, s.tags, PosMode::enabled, char_mask,
                                   pos_mask, trace);
    const Gradients g = backward(params, trace, s.target);

    auto loss_at = [&](const NetworkParams& p) {
      ForwardTrace t;
      const Pmf pmf =
          forward_train_with_masks(p, s.context, s.tags, PosMode::enabled, char_mask, pos_mask, t);
      return cross_entropy_loss(pmf, s.target);
    };

    // spot-check entries across every stage of the network
    struct Probe {
      double* weight;
      double analytic;
    };
    NetworkParams mutated = params;
    const std::vector<Probe> probes = {
        {&mutated.char_gru.v_h(0, s.context[1]), g.char_gru.v_h(0, s.context[1])},
        {&mutated.char_gru.u_r(1, 0), g.char_gru.u_r(1, 0)},
        {&mutated.char_gru.b_z(0), g.char_gru.b_z(0)},
        {&mutated.pos_gru.v_h(1, s.tags[0]), g.pos_gru.v_h(1, s.tags[0])},
        {&mutated.pos_gru.u_h(0, 1), g.pos_gru.u_h(0, 1)},
        {&mutated.merged_gru.v_r(1, 2), g.merged_gru.v_r(1, 2)},
        {&mutated.merged_gru.u_h(0, 1), g.merged_gru.u_h(0, 1)},
        {&mutated.merged_gru.b_h(1), g.merged_gru.b_h(1)},
        {&mutated.dense1.w(0, 1), g.dense1.w(0, 1)},
        {&mutated.dense2.w(100, 0), g.dense2.w(100, 0)},
        {&mutated.dense2.theta(200), g.dense2.theta(200)},
    };
    const double h = 1e-5;
    for (const Probe& probe : probes) {
      const double saved = *probe.weight;
      *probe.weight = saved + h;
      const double up = loss_at(mutated);
      *probe.weight = saved - h;
      const double down = loss_at(mutated);
      *probe.weight = saved;
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::abs(probe.analytic - fd) <
            1e-4 * std::max(1.0, std::max(std::abs(probe.analytic), std::abs(fd))));
    }
  }
}

TEST_CASE("rmsprop follows the update recurrence") {
  const ModelConfig cfg = tiny_config(34);
  NetworkParams params = zeroed_params(cfg);
  RmspropState state = zeros_like(params);
  Gradients grads = zeros_like(params);
  TrainingConfig tc;  // eta 0.001, epsilon 1e-8

  grads.dense1.theta(0) = 1.0;
  rmsprop_step(params, grads, state, tc);
  CHECK(state.dense1.theta(0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(params.dense1.theta(0) == doctest::Approx(-0.0031622775601683824).epsilon(1e-12));
  CHECK(params.dense1.theta(1) == 0.0);
  CHECK(max_abs(state) == doctest::Approx(0.1).epsilon(1e-14));

  rmsprop_step(params, grads, state, tc);
  CHECK(state.dense1.theta(0) == doctest::Approx(0.19).epsilon(1e-14));
  CHECK(params.dense1.theta(0) == doctest::Approx(-0.005456434846242422).epsilon(1e-12));

  // zero gradient: parameters hold still while the average decays
  grads.dense1.theta(0) = 0.0;
  const double held = params.dense1.theta(0);
  rmsprop_step(params, grads, state, tc);
  CHECK(params.dense1.theta(0) == held);
  CHECK(state.dense1.theta(0) == doctest::Approx(0.171).epsilon(1e-14));
}

TEST_CASE("rmsprop rejects broken gradients") {
  const ModelConfig cfg = tiny_config(35);
  NetworkParams params = init_params(cfg);
  RmspropState state = zeros_like(params);
  Gradients grads = zeros_like(params);
  TrainingConfig tc;

  grads.dense1.theta(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(rmsprop_step(params, grads, state, tc),
                       doctest::Contains("dense1.theta"), Error);

  grads = zeros_like(params);
  grads.merged_gru.u_h(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(rmsprop_step(params, grads, state, tc),
                       doctest::Contains("merged_gru.u_h"), Error);

  grads = zeros_like(params);
  grads.dense1.theta.resize(5);
  grads.dense1.theta.setZero();
  CHECK_THROWS_AS(rmsprop_step(params, grads, state, tc), std::invalid_argument);
}

TEST_CASE("training config validation") {
  TrainingConfig tc;
  CHECK_NOTHROW(tc.validate());

  TrainingConfig bad = tc;
  bad.eta = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.eta = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.eta = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = tc;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = tc;
  bad.stride = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = tc;
  bad.batch = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("a single sample is memorized") {
  const ModelConfig cfg = tiny_config(36);
  NetworkParams params = init_params(cfg);
  const std::vector<WindowSample> dataset = {demo_sample()};

  TrainingConfig tc;
  tc.epochs = 600;
  tc.eta = 0.02;  // the normalized steps are eta-sized, and the logit gap must reach ~8

  std::ostringstream log;
  const TrainResult result = train(params, dataset, tc, PosMode::enabled, &log);
  REQUIRE(result.epochs.size() == 600);
  CHECK(result.epochs.front().epoch == 1);
  CHECK(result.epochs.back().epoch == 600);
  CHECK(result.epochs.back().accuracy == 1.0);
  CHECK(result.epochs.back().mean_loss < 0.05);
  CHECK(result.epochs.back().mean_loss < result.epochs.front().mean_loss);
  CHECK_FALSE(result.stopped_early);
  CHECK(evaluate_accuracy(params, dataset) == 1.0);

  // one tab-separated line per epoch
  std::istringstream lines(log.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(std::count(line.begin(), line.end(), '\t') == 3);
    if (count == 1) CHECK(line.rfind("1\t", 0) == 0);
  }
  CHECK(count == 600);
}

TEST_CASE("epoch callback can stop training early") {
  const ModelConfig cfg = tiny_config(37);
  NetworkParams params = init_params(cfg);
  const std::vector<WindowSample> dataset = {demo_sample()};
  TrainingConfig tc;
  tc.epochs = 50;

  const TrainResult result =
      train(params, dataset, tc, PosMode::enabled, nullptr,
            [](const EpochStats& st) { return st.epoch < 3; });
  CHECK(result.epochs.size() == 3);
  CHECK(result.stopped_early);
}

TEST_CASE("training is deterministic in the seed") {
  ModelConfig cfg = tiny_config(38);
  cfg.dropout_rho = 0.2;
  const std::vector<WindowSample> dataset = {demo_sample(),
                                             {{1, 2, 3}, {0, 0, 0}, 44},
                                             {{9, 8, 7}, {5, 5, 5}, 200}};
  TrainingConfig tc;
  tc.epochs = 5;

  NetworkParams a = init_params(cfg);
  NetworkParams b = init_params(cfg);
  const TrainResult ra = train(a, dataset, tc);
  const TrainResult rb = train(b, dataset, tc);
  CHECK(params_equal(a, b));
  REQUIRE(ra.epochs.size() == rb.epochs.size());
  for (std::size_t i = 0; i < ra.epochs.size(); ++i) {
    CHECK(ra.epochs[i].mean_loss == rb.epochs[i].mean_loss);
    CHECK(ra.epochs[i].accuracy == rb.epochs[i].accuracy);
  }
}

TEST_CASE("a vanishing learning rate leaves the network untouched") {
  const ModelConfig cfg = tiny_config(39);  // dropout off: loss is a pure function
  NetworkParams params = init_params(cfg);
  const NetworkParams before = params;
  const std::vector<WindowSample> dataset = {demo_sample(), {{4, 4, 4}, {1, 1, 1}, 9}};

  TrainingConfig tc;
  tc.epochs = 4;
  tc.eta = 1e-300;  // legal, but every update is denormal dust
  const TrainResult result = train(params, dataset, tc);

  // Zero-initialized biases do pick up ~1e-295-scale values, so compare with
  // a bound instead of bitwise; nothing observable may move.
  double worst = 0.0;
  for_each_tensor(
      [&](const auto& now, const auto& then) {
        worst = std::max(worst, (now - then).cwiseAbs().maxCoeff());
      },
      params, before);
  CHECK(worst <= 1e-200);
  for (const EpochStats& st : result.epochs) {
    CHECK(st.mean_loss == result.epochs.front().mean_loss);
  }
}

TEST_CASE("a batch of identical samples equals one plain step") {
  const ModelConfig cfg = tiny_config(40);
  const WindowSample s = demo_sample();

  NetworkParams single = init_params(cfg);
  NetworkParams batched = init_params(cfg);

  TrainingConfig tc;
  tc.epochs = 8;

  (void)train(single, {s}, tc);
  TrainingConfig tc2 = tc;
  tc2.batch = 2;
  (void)train(batched, {s, s}, tc2);

  CHECK(params_equal(single, batched));
}

TEST_CASE("evaluate_accuracy counts argmax hits") {
  const ModelConfig cfg = tiny_config(41);
  NetworkParams params = zeroed_params(cfg);
  params.dense2.theta(120) = 10.0;  // the network always predicts byte 120

  std::vector<WindowSample> dataset = {
      {{1, 2, 3}, {0, 0, 0}, 120},
      {{4, 5, 6}, {0, 0, 0}, 120},
      {{7, 8, 9}, {0, 0, 0}, 121},
      {{1, 1, 1}, {0, 0, 0}, 0},
  };
  CHECK(evaluate_accuracy(params, dataset) == 0.5);
  CHECK(evaluate_accuracy(params, {}) == 0.0);
}

TEST_CASE("train rejects an empty dataset") {
  const ModelConfig cfg = tiny_config(42);
  NetworkParams params = init_params(cfg);
  TrainingConfig tc;
  CHECK_THROWS_AS(train(params, {}, tc), std::invalid_argument);
}

}  // TEST_SUITE
