#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "yoto/gradcheck.hpp"
#include "yoto/loss_layer.hpp"
#include "yoto/models.hpp"

namespace {

TEST(CentralFd, KnownDerivatives) {
  const std::vector<double> x{1.0, 2.0};
  const auto g = yoto::central_fd(
      [](std::span<const double> p) { return p[0] * p[0] + p[1] * p[1]; }, x, 1e-6);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 4.0, 1e-8);

  const auto z = yoto::central_fd([](std::span<const double>) { return 3.0; }, x, 1e-6);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.0);
  EXPECT_THROW(yoto::central_fd([](std::span<const double>) { return 0.0; }, x, 0.0),
               std::invalid_argument);
}

TEST(CentralFd, AgreesWithEmpiricalGradientAtRandomPoint) {
  const std::vector<double> l{0.4, 1.7, 0.9};
  const std::vector<double> aux{0.3, -1.1};
  const auto f = yoto::central_fd(
      [&](std::span<const double> a) {
        return yoto::composite_loss(
            yoto::softmax_weights(yoto::HPExponents::from_auxiliary(a)), l);
      },
      aux, 1e-6);
  const auto g = yoto::hp_gradient_empirical(yoto::HPExponents::from_auxiliary(aux), l);
  EXPECT_NEAR(f[0], g[1], 1e-9);
  EXPECT_NEAR(f[1], g[2], 1e-9);
}

TEST(HpCheck, DefaultProtocolPasses) {
  const auto r = yoto::check_hp_gradients();
  EXPECT_TRUE(r.pass) << r.to_json();
  EXPECT_EQ(r.n_trials, 100u);
  EXPECT_LT(r.max_relative_error, 1e-6);
}

TEST(HpCheck, UnattainableToleranceFails) {
  yoto::HpCheckOptions o;
  o.tolerance = 1e-16;
  EXPECT_FALSE(yoto::check_hp_gradients(o).pass);
}

TEST(HpCheck, DeterministicInSeed) {
  yoto::HpCheckOptions o;
  o.seed = 42;
  const auto a = yoto::check_hp_gradients(o);
  const auto b = yoto::check_hp_gradients(o);
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(HpCheck, SymmetricEqualLossesAgreeNearZero) {
  const std::vector<double> l{1.3, 1.3};
  const std::vector<double> aux{0.0};
  const auto f = yoto::central_fd(
      [&](std::span<const double> a) {
        return yoto::composite_loss(
            yoto::softmax_weights(yoto::HPExponents::from_auxiliary(a)), l);
      },
      aux, 1e-6);
  EXPECT_NEAR(f[0], 0.0, 1e-9);
  EXPECT_EQ(yoto::hp_gradient_empirical(yoto::HPExponents({0.0, 0.0}), l)[1], 0.0);
}

TEST(RegCheck, DefaultProtocolPassesAndHandPoint) {
  const auto r = yoto::check_reg_gradients();
  EXPECT_TRUE(r.pass) << r.to_json();
  const auto f = yoto::central_fd(
      [](std::span<const double> a) {
        return yoto::regularizer_value(yoto::HPExponents::from_auxiliary(a), 1.0);
      },
      std::vector<double>{0.0}, 1e-6);
  EXPECT_NEAR(f[0], 0.5, 1e-9);
}

TEST(RegCheck, UniformExponentsOnlySigmoidRemains) {
  for (std::size_t k = 1; k <= 5; ++k) {
    const std::vector<double> aux(k, 0.0);
    const auto f = yoto::central_fd(
        [](std::span<const double> a) {
          return yoto::regularizer_value(yoto::HPExponents::from_auxiliary(a), 1.0);
        },
        aux, 1e-6);
    for (double x : f) EXPECT_NEAR(x, 0.5, 1e-9);
  }
}

TEST(ModelCheck, BothModelsPass) {
  for (auto kind : {yoto::ModelKind::kLinearRegression, yoto::ModelKind::kTinyMlp}) {
    yoto::ToyModelSpec spec;
    spec.kind = kind;
    const auto r = yoto::check_model_gradients(*yoto::make_model(spec));
    EXPECT_TRUE(r.pass) << r.to_json();
    EXPECT_EQ(r.n_trials, 50u);
  }
}

TEST(Accumulate, IdenticalVectorsGiveExactZero) {
  yoto::GradCheckReport r;
  const std::vector<double> a{0.5, -2.0, 3.0};
  yoto::accumulate(r, 0, a, a);
  EXPECT_EQ(r.max_relative_error, 0.0);
  EXPECT_EQ(r.max_absolute_error, 0.0);
}

TEST(Accumulate, UsesLargestMagnitudeAsScale) {
  yoto::GradCheckReport r;
  yoto::accumulate(r, 3, std::vector<double>{1e-4, 2.0}, std::vector<double>{1.1e-4, 2.0});
  EXPECT_NEAR(r.max_relative_error, 1e-5 / 2.0, 1e-18);
  EXPECT_EQ(r.worst_trial, 3u);
  EXPECT_EQ(r.worst_index, 0u);
}

}  // namespace
