#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "yoto/errors.hpp"
#include "yoto/loss_layer.hpp"
#include "yoto/optimizers.hpp"

namespace {

using yoto::HPExponents;
using yoto::HPState;
using yoto::OptimizerConfig;
using yoto::ParamState;

OptimizerConfig plain_config() {
  OptimizerConfig c;
  c.alpha = 0.1;
  c.beta1 = 0.0;
  c.weight_decay = 0.0;
  c.hp_decay = 0.0;
  c.schedule.kind = yoto::ScheduleKind::kConstant;
  return c;
}

TEST(InitHpState, Examples) {
  HPState s = yoto::init_hp_state(2, 0.1);
  ASSERT_EQ(s.mu.size(), 3u);
  EXPECT_EQ(s.mu[0], 0.0);
  EXPECT_NEAR(s.mu[1], -2.302585, 1e-6);
  EXPECT_NEAR(s.mu[2], -2.302585, 1e-6);
  for (double n : s.n) EXPECT_EQ(n, 0.0);

  s = yoto::init_hp_state(1, 1.0);
  EXPECT_EQ(s.mu[1], 0.0);
  s = yoto::init_hp_state(1, std::exp(-4.0));
  EXPECT_NEAR(s.mu[1], -4.0, 1e-15);
}

TEST(InitHpState, RejectsBadArguments) {
  EXPECT_THROW(yoto::init_hp_state(0, 0.1), std::invalid_argument);
  EXPECT_THROW(yoto::init_hp_state(2, 0.0), std::invalid_argument);
  EXPECT_THROW(yoto::init_hp_state(2, -1.0), std::invalid_argument);
}

TEST(Schedule, Multipliers) {
  OptimizerConfig c;
  c.total_steps = 100;
  c.schedule.kind = yoto::ScheduleKind::kConstant;
  EXPECT_EQ(yoto::schedule_multiplier(1, c), 1.0);
  EXPECT_EQ(yoto::schedule_multiplier(73, c), 1.0);

  c.schedule.kind = yoto::ScheduleKind::kCosine;
  EXPECT_NEAR(yoto::schedule_multiplier(100, c), 0.0, 1e-15);
  EXPECT_NEAR(yoto::schedule_multiplier(50, c), 0.5, 1e-15);

  c.schedule.kind = yoto::ScheduleKind::kStep;
  c.schedule.milestones = {10};
  c.schedule.factor = 0.1;
  EXPECT_EQ(yoto::schedule_multiplier(10, c), 1.0);
  EXPECT_DOUBLE_EQ(yoto::schedule_multiplier(11, c), 0.1);
  c.schedule.milestones = {10, 20};
  EXPECT_DOUBLE_EQ(yoto::schedule_multiplier(21, c), 0.1 * 0.1);

  EXPECT_THROW(yoto::schedule_multiplier(0, c), std::invalid_argument);
  EXPECT_THROW(yoto::schedule_multiplier(101, c), std::invalid_argument);
}

TEST(SgdwStep, PlainGradientStep) {
  const ParamState p({1.0});
  const HPState h = yoto::init_hp_state(1, 1.0);
  const auto [p2, h2] = yoto::sgdw_yoto_step(p, h, std::vector<double>{2.0},
                                             std::vector<double>{0.0, 0.0}, 1, plain_config());
  EXPECT_DOUBLE_EQ(p2.w[0], 0.8);
  EXPECT_EQ(p2.step, 1);
}

TEST(SgdwStep, VanillaDescentOnBothBlocks) {
  const ParamState p({1.0, -2.0});
  const HPState h(HPExponents({0.0, 0.3}));
  const auto [p2, h2] = yoto::sgdw_yoto_step(p, h, std::vector<double>{0.5, 1.0},
                                             std::vector<double>{0.0, -2.0}, 1, plain_config());
  EXPECT_DOUBLE_EQ(p2.w[0], 1.0 - 0.1 * 0.5);
  EXPECT_DOUBLE_EQ(p2.w[1], -2.0 - 0.1 * 1.0);
  EXPECT_DOUBLE_EQ(h2.mu[1], 0.3 + 0.1 * 2.0);
}

TEST(SgdwStep, ZeroGradientIsFixedPoint) {
  const ParamState p({1.5, -0.25});
  const HPState h(HPExponents({0.0, -1.0, 0.7}));
  const auto [p2, h2] =
      yoto::sgdw_yoto_step(p, h, std::vector<double>{0.0, 0.0}, std::vector<double>{0.0, 0.0, 0.0},
                           1, plain_config());
  EXPECT_EQ(p2.w, p.w);
  EXPECT_EQ(h2.mu.values(), h.mu.values());
  for (double m : p2.m) EXPECT_EQ(m, 0.0);
  for (double n : h2.n) EXPECT_EQ(n, 0.0);
}

TEST(SgdwStep, MomentumAccumulates) {
  OptimizerConfig c = plain_config();
  c.beta1 = 0.9;
  ParamState p({3.0});
  p.m = {1.0};
  const HPState h = yoto::init_hp_state(1, 1.0);
  const auto [p2, h2] =
      yoto::sgdw_yoto_step(p, h, std::vector<double>{1.0}, std::vector<double>{0.0, 0.0}, 1, c);
  EXPECT_DOUBLE_EQ(p2.m[0], 1.0);
  EXPECT_DOUBLE_EQ(p2.w[0], 3.0 - 1.0);
}

TEST(SgdwStep, DecoupledDecayAndRegularizerBypassMomentum) {
  OptimizerConfig c = plain_config();
  c.beta1 = 0.5;
  c.weight_decay = 0.2;
  c.hp_decay = 2.0;
  const ParamState p({2.0});
  const HPState h(HPExponents({0.0, 0.0}));
  const auto [p2, h2] =
      yoto::sgdw_yoto_step(p, h, std::vector<double>{0.0}, std::vector<double>{0.0, 0.0}, 1, c);
  // Decay and regularizer act on the parameters but never enter m or n.
  EXPECT_EQ(p2.m[0], 0.0);
  EXPECT_EQ(h2.n[1], 0.0);
  EXPECT_DOUBLE_EQ(p2.w[0], 2.0 - 0.1 * 0.2 * 2.0);
  // regularizer gradient at mu = (0, 0) is (0, 0.5)
  EXPECT_DOUBLE_EQ(h2.mu[1], -0.1 * 2.0 * 0.5);
}

TEST(SgdwStep, RegularizerUsesPreviousExponents) {
  OptimizerConfig c = plain_config();
  c.hp_decay = 1.0;
  const ParamState p({0.0});
  const HPState h(HPExponents({0.0, 0.4}));
  const auto [p2, h2] =
      yoto::sgdw_yoto_step(p, h, std::vector<double>{0.0}, std::vector<double>{0.0, 1.0}, 1, c);
  const double r = yoto::regularizer_gradient(HPExponents({0.0, 0.4}))[1];
  EXPECT_DOUBLE_EQ(h2.mu[1], 0.4 - 0.1 * 1.0 - 0.1 * r);
}

TEST(SgdwStep, ShapeAndFrozenExponentChecks) {
  const ParamState p({1.0});
  const HPState h = yoto::init_hp_state(1, 1.0);
  EXPECT_THROW(yoto::sgdw_yoto_step(p, h, std::vector<double>{1.0, 2.0},
                                    std::vector<double>{0.0, 0.0}, 1, plain_config()),
               std::invalid_argument);
  EXPECT_THROW(yoto::sgdw_yoto_step(p, h, std::vector<double>{1.0},
                                    std::vector<double>{0.3, 0.0}, 1, plain_config()),
               std::invalid_argument);
}

TEST(SgdwStep, NonFiniteGradientIsDivergence) {
  const ParamState p({1.0});
  const HPState h = yoto::init_hp_state(1, 1.0);
  EXPECT_THROW(yoto::sgdw_yoto_step(p, h, std::vector<double>{NAN},
                                    std::vector<double>{0.0, 0.0}, 1, plain_config()),
               yoto::DivergenceError);
}

TEST(AdamwStep, FirstStepMagnitudeIsAlpha) {
  OptimizerConfig c = plain_config();
  c.kind = yoto::OptimizerKind::kAdamw;
  c.beta1 = 0.9;
  c.beta2 = 0.999;
  const ParamState p({0.5});
  const HPState h = yoto::init_hp_state(1, 1.0);
  const auto [p2, h2] =
      yoto::adamw_yoto_step(p, h, std::vector<double>{1.0}, std::vector<double>{0.0, 0.0}, 1, c);
  EXPECT_NEAR(std::abs(p2.w[0] - 0.5), 0.1, 1e-8);
}

TEST(AdamwStep, DecayOnlyWithZeroGradient) {
  OptimizerConfig c = plain_config();
  c.kind = yoto::OptimizerKind::kAdamw;
  c.weight_decay = 0.1;
  const ParamState p({1.0});
  const HPState h = yoto::init_hp_state(1, 1.0);
  const auto [p2, h2] =
      yoto::adamw_yoto_step(p, h, std::vector<double>{0.0}, std::vector<double>{0.0, 0.0}, 1, c);
  EXPECT_DOUBLE_EQ(p2.w[0], 0.99);
}

TEST(YotoStep, FrozenExponentAndMomentStayZero) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto kind : {yoto::OptimizerKind::kSgdw, yoto::OptimizerKind::kAdamw}) {
    OptimizerConfig c;
    c.kind = kind;
    c.total_steps = 5000;
    c.schedule.kind = yoto::ScheduleKind::kCosine;
    ParamState p({0.1, -0.2, 0.3});
    HPState h = yoto::init_hp_state(3, 0.1);
    for (std::int64_t t = 1; t <= c.total_steps; ++t) {
      std::vector<double> g(3);
      std::vector<double> l(4);
      for (double& x : g) x = 0.1 * normal(rng);
      for (double& x : l) x = std::abs(normal(rng)) + 0.1;
      const auto hg = yoto::hp_gradient_empirical(h.mu, l);
      std::tie(p, h) = yoto::yoto_step(p, h, g, hg, t, c);
      ASSERT_EQ(h.mu[0], 0.0);
      ASSERT_EQ(h.n[0], 0.0);
      const auto lambda = yoto::softmax_weights(h.mu);
      double sum = 0.0;
      for (double x : lambda.values()) sum += x;
      ASSERT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = OptimizerConfig{};
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = OptimizerConfig{};
  c.hp_decay = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
