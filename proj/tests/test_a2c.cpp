#include <cmath>
#include <vector>

#include "doctest.h"
#include "put/a2c.hpp"
#include "put/oracle.hpp"

using namespace put;

namespace {

DistortionMatrix hamming(int w) {
  Matrix m(w, w);
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < w; ++y) m(x, y) = x == y ? 0.0 : 1.0;
  return {StateSpace::make(w), m, "grid-steps"};
}

}  // namespace

TEST_CASE("actor kernel sampling") {
  Rng rng(1);
  int w = 3;
  MLP actor = MLP::make(w, 8, w * w, MLP::Output::Softplus, rng);
  Belief beta = {0.2, 0.5, 0.3};

  SUBCASE("slices are stochastic and the log-prob decomposes per slice") {
    Rng r1(5);
    auto ks = actor_to_kernel(actor, beta, ActionMode::StateConditioned, r1);
    CHECK(ks.kernel.w == w);
    double lp = 0.0;
    for (int s = 0; s < w; ++s) {
      double sum = 0.0;
      for (int y = 0; y < w; ++y) sum += ks.kernel.probs[static_cast<size_t>(s) * w + y];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      lp += dirichlet_log_prob(
          std::span<const double>(ks.alpha.data() + static_cast<size_t>(s) * w, w),
          std::span<const double>(ks.kernel.probs.data() + static_cast<size_t>(s) * w, w));
    }
    CHECK(ks.log_prob == doctest::Approx(lp).epsilon(1e-10));
    // concentrations are the floored softplus head
    auto out = forward(actor, beta);
    for (size_t i = 0; i < ks.alpha.size(); ++i)
      CHECK(ks.alpha[i] == doctest::Approx(out[i] + 1e-3).epsilon(1e-12));
  }

  SUBCASE("same stream, same draw; different stream, different draw") {
    Rng a(9), b(9), c(10);
    auto k1 = actor_to_kernel(actor, beta, ActionMode::StateConditioned, a);
    auto k2 = actor_to_kernel(actor, beta, ActionMode::StateConditioned, b);
    auto k3 = actor_to_kernel(actor, beta, ActionMode::StateConditioned, c);
    CHECK(k1.kernel.probs == k2.kernel.probs);
    CHECK(k1.kernel.probs != k3.kernel.probs);
  }

  SUBCASE("mean kernel is alpha over its slice total") {
    auto mean = actor_mean_kernel(actor, beta, ActionMode::StateConditioned);
    auto out = forward(actor, beta);
    for (int s = 0; s < w; ++s) {
      double a0 = 0.0;
      for (int y = 0; y < w; ++y) a0 += out[static_cast<size_t>(s) * w + y] + 1e-3;
      for (int y = 0; y < w; ++y)
        CHECK(mean.probs[static_cast<size_t>(s) * w + y] ==
              doctest::Approx((out[static_cast<size_t>(s) * w + y] + 1e-3) / a0).epsilon(1e-12));
    }
  }

  SUBCASE("pair-conditioned actors need w^3 outputs") {
    MLP pair_actor = MLP::make(w, 8, w * w * w, MLP::Output::Softplus, rng);
    Rng r(3);
    auto ks = actor_to_kernel(pair_actor, beta, ActionMode::PairConditioned, r);
    CHECK(ks.kernel.slice_count() == w * w);
    CHECK_THROWS_AS(actor_to_kernel(actor, beta, ActionMode::PairConditioned, r),
                    std::invalid_argument);
  }
}

TEST_CASE("td error matches the hand formula") {
  Rng rng(2);
  MLP critic = MLP::make(2, 6, 1, MLP::Output::Linear, rng);
  ExperienceTuple exp;
  exp.belief_before = {0.7, 0.3};
  exp.belief_after = {0.4, 0.6};
  exp.cost.combined = 1.25;
  double v0 = critic_value(critic, exp.belief_before);
  double v1 = critic_value(critic, exp.belief_after);
  CHECK(td_error(critic, exp, 0.99) == doctest::Approx(1.25 + 0.99 * v1 - v0).epsilon(1e-12));
  CHECK(td_error(critic, exp, 0.0) == doctest::Approx(1.25 - v0).epsilon(1e-12));
}

TEST_CASE("policy evaluation endpoints") {
  int w = 2;
  auto chain = make_uniform_chain(StateSpace::make(w));
  auto init = InitialDistribution::uniform(w);
  auto d = hamming(w);
  EnvConfig env_cfg;
  env_cfg.mode = ConstraintMode::ADC;
  env_cfg.lambda = 2.0;
  env_cfg.dbar = 0.1;
  Rng rng(11);

  SUBCASE("truthful release has zero distortion and full leakage") {
    PolicyFn truthful = [w](const Belief&, Rng&) {
      return ActionKernel::truthful(w, ActionMode::StateConditioned);
    };
    auto res = evaluate_policy(truthful, chain, init, d, env_cfg, 5, 40, rng);
    CHECK(res.avg_distortion == doctest::Approx(0.0));
    CHECK(res.avg_leakage == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(res.avg_cost ==
          doctest::Approx(res.avg_leakage + 2.0 * (0.0 - 0.1)).epsilon(1e-9));
  }

  SUBCASE("constant release leaks nothing") {
    PolicyFn constant = [w](const Belief&, Rng&) {
      return ActionKernel::constant(w, ActionMode::StateConditioned, {0.8, 0.2});
    };
    auto res = evaluate_policy(constant, chain, init, d, env_cfg, 5, 40, rng);
    CHECK(res.avg_leakage <= 1e-12);
    CHECK(res.avg_distortion > 0.0);
  }

  SUBCASE("rollout mean approaches the exact path average of a fixed kernel") {
    // biased chain so the leakage is belief-dependent
    Matrix m(2, 2);
    m(0, 0) = 0.8;
    m(1, 0) = 0.2;
    m(0, 1) = 0.3;
    m(1, 1) = 0.7;
    TransitionMatrix biased{StateSpace::make(2), m};
    ActionKernel fixed = ActionKernel::constant(2, ActionMode::StateConditioned, {0.5, 0.5});
    fixed.probs = {0.85, 0.15, 0.25, 0.75};  // a(y|x)
    PolicyFn pol = [&fixed](const Belief&, Rng&) { return fixed; };
    int n = 3;
    auto res = evaluate_policy(pol, biased, init, d, env_cfg, n, 4000, rng);
    auto joint =
        enumerate_joint_simplified(SimplifiedPolicy::from_kernel(fixed, n), biased, init);
    auto terms = pairwise_terms(joint);
    double exact = 0.0;
    for (double t : terms) exact += t / n;
    CHECK(std::abs(res.avg_leakage - exact) < 0.02);
    CHECK(std::abs(res.avg_distortion - expected_distortion_joint(joint, d)) < 0.02);
  }
}

TEST_CASE("training runs, is deterministic, and reports full curves") {
  auto chain = make_uniform_chain(StateSpace::make(2));
  auto init = InitialDistribution::uniform(2);
  auto d = hamming(2);
  TrainConfig cfg;
  cfg.n = 10;
  cfg.episodes = 40;
  cfg.hidden = 8;
  cfg.lambda = 0.5;
  cfg.dbar = 0.2;
  cfg.seed = 5;
  auto r1 = train(cfg, chain, init, d);
  auto r2 = train(cfg, chain, init, d);
  CHECK(r1.curve.avg_cost.size() == 40);
  CHECK(r1.curve.avg_leakage.size() == 40);
  CHECK(r1.curve.avg_distortion.size() == 40);
  CHECK(r1.curve.avg_cost == r2.curve.avg_cost);
  Belief probe = {0.3, 0.7};
  CHECK(forward(r1.actor, probe) == forward(r2.actor, probe));
  CHECK(forward(r1.critic, probe) == forward(r2.critic, probe));

  cfg.seed = 6;
  auto r3 = train(cfg, chain, init, d);
  CHECK(r1.curve.avg_cost != r3.curve.avg_cost);

  cfg.episodes = 0;
  CHECK_THROWS_AS(train(cfg, chain, init, d), std::invalid_argument);
}

TEST_CASE("training drives the cost down on an easy instance") {
  // lambda 0: the optimum is a non-informative release with zero leakage
  auto chain = make_uniform_chain(StateSpace::make(2));
  auto init = InitialDistribution::uniform(2);
  auto d = hamming(2);
  TrainConfig cfg;
  cfg.n = 20;
  cfg.episodes = 400;
  cfg.hidden = 16;
  cfg.lambda = 0.0;
  cfg.dbar = 0.0;
  cfg.actor_lr = 3e-3;
  cfg.critic_lr = 3e-3;
  cfg.seed = 7;
  auto res = train(cfg, chain, init, d);
  Rng eval_rng(99);
  EnvConfig env_cfg;
  env_cfg.lambda = 0.0;
  auto ev = evaluate_actor(res.actor, cfg.action_mode, chain, init, d, env_cfg, 20, 50, eval_rng);
  CHECK(ev.avg_leakage < 0.08);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 50; ++i) head += res.curve.avg_cost[i] / 50;
  for (int i = 350; i < 400; ++i) tail += res.curve.avg_cost[i] / 50;
  CHECK(tail < head);
}

TEST_CASE("idc evaluation respects the per-step threshold") {
  auto chain = make_uniform_chain(StateSpace::make(3));
  auto init = InitialDistribution::uniform(3);
  auto d = hamming(3);
  Rng rng(4);
  MLP actor = MLP::make(3, 8, 9, MLP::Output::Softplus, rng);
  EnvConfig env_cfg;
  env_cfg.mode = ConstraintMode::IDC;
  env_cfg.dhat = 0.0;
  Rng eval_rng(12);
  auto ev = evaluate_actor(actor, ActionMode::StateConditioned, chain, init, d, env_cfg, 8, 30,
                           eval_rng);
  // a zero threshold under hamming admits only the truthful release
  CHECK(ev.avg_distortion == doctest::Approx(0.0));
  CHECK(ev.avg_leakage == doctest::Approx(std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("sweep over multiple points") {
  auto chain = make_uniform_chain(StateSpace::make(2));
  auto init = InitialDistribution::uniform(2);
  auto d = hamming(2);
  TrainConfig base;
  base.n = 8;
  base.episodes = 30;
  base.hidden = 8;
  base.dbar = 0.2;
  base.seed = 21;

  std::vector<LearningCurve> curves;
  auto recs = put_sweep(base, {0.0, 1.0}, chain, init, d, 20, 1, &curves);
  REQUIRE(recs.size() == 2);
  REQUIRE(curves.size() == 2);
  CHECK(recs[0].constraint_mode == "adc");
  CHECK(recs[0].lambda == 0.0);
  CHECK(recs[1].lambda == 1.0);
  for (const auto& r : recs) {
    CHECK_FALSE(r.failed);
    CHECK(r.n == 8);
    CHECK(r.rollouts == 20);
    CHECK(r.avg_leakage_nats >= -1e-9);
  }
  for (const auto& c : curves) CHECK(c.avg_cost.size() == 30);

  // per-point seeds differ, reruns are bitwise identical, jobs > 1 agrees
  auto again = put_sweep(base, {0.0, 1.0}, chain, init, d, 20, 2);
  for (size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].avg_leakage_nats == again[i].avg_leakage_nats);
    CHECK(recs[i].avg_distortion == again[i].avg_distortion);
  }
  CHECK(recs[0].seed != recs[1].seed);

  // a broken point is recorded, not fatal
  TrainConfig bad = base;
  bad.mode = ConstraintMode::IDC;
  auto mixed = put_sweep(bad, {-1.0, 1.0}, chain, init, d, 20, 1);
  REQUIRE(mixed.size() == 2);
  CHECK(mixed[0].failed);
  CHECK_FALSE(mixed[0].error.empty());
  CHECK_FALSE(mixed[1].failed);
}
