//
// Copyright 2026 The ldpsgd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "ldpsgd/models.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ldpsgd/errors.h"
#include "oracles.h"

namespace ldpsgd {
namespace {

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

std::vector<LossModel> AllModels() {
  return {LossModel::HuberLinear(1.345), LossModel::HuberLinear(0.3),
          LossModel::Logistic(), LossModel::Expectile(1.0, 0.9),
          LossModel::Expectile(2.0, 0.2)};
}

TEST(MallowWeightTest, Examples) {
  EXPECT_EQ(MallowWeight(Vec({0, 0})), 1.0);
  EXPECT_EQ(MallowWeight(Vec({1, 1})), 1.0);
  EXPECT_EQ(MallowWeight(Vec({2, 2})), 0.25);
}

TEST(FamilyTest, NamesRoundTrip) {
  for (Family f : {Family::kHuberLinear, Family::kLogistic, Family::kExpectile}) {
    EXPECT_EQ(ParseFamily(FamilyName(f)), f);
  }
  EXPECT_EQ(ParseFamily("linear"), Family::kHuberLinear);
  EXPECT_THROW(ParseFamily("probit"), ParseError);
}

TEST(FactoryTest, RejectsBadParameters) {
  EXPECT_THROW(LossModel::HuberLinear(0.0), DomainError);
  EXPECT_THROW(LossModel::Expectile(1.0, 1.0), DomainError);
  EXPECT_THROW(LossModel::Expectile(1.0, 0.0), DomainError);
  EXPECT_THROW(LossModel::Expectile(-1.0, 0.5), DomainError);
}

TEST(GradientTest, HuberInsideRegion) {
  LossModel m = LossModel::HuberLinear(1.345);
  Eigen::VectorXd g = m.Gradient(Vec({1, 0}), {Vec({1, 0}), 2.0});
  EXPECT_EQ(g, Vec({-1, 0}));
}

TEST(GradientTest, HuberTailMatchesFiniteDifference) {
  LossModel m = LossModel::HuberLinear(1.345);
  Observation obs{Vec({2, 2}), 10.0};
  Eigen::VectorXd theta = Vec({0, 0});
  Eigen::VectorXd fd = testing::FiniteDifferenceGradient(m, theta, obs, 1e-6);
  Eigen::VectorXd g = m.Gradient(theta, obs);
  EXPECT_NEAR(g(0), -0.6725, 1e-12);
  EXPECT_NEAR(g(1), -0.6725, 1e-12);
  EXPECT_LE((fd - g).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GradientTest, LogisticAtZero) {
  LossModel m = LossModel::Logistic();
  Eigen::VectorXd g = m.Gradient(Vec({0, 0}), {Vec({1, 0}), 1.0});
  EXPECT_EQ(g, Vec({-0.5, 0}));
}

TEST(GradientTest, ExpectileAtHalfIsHalfHuber) {
  LossModel h = LossModel::HuberLinear(1.2);
  LossModel e = LossModel::Expectile(1.2, 0.5);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 200; ++i) {
    testing::FdPoint pt = testing::SmoothPoint(h, 3, 0.0, gen);
    EXPECT_EQ(e.Gradient(pt.theta, pt.obs), 0.5 * h.Gradient(pt.theta, pt.obs));
    EXPECT_EQ(e.Loss(pt.theta, pt.obs), 0.5 * h.Loss(pt.theta, pt.obs));
  }
}

TEST(GradientTest, DimensionMismatch) {
  LossModel m = LossModel::HuberLinear(1.0);
  EXPECT_THROW(m.Gradient(Vec({0, 0, 0}), {Vec({1, 0}), 0.0}), DomainError);
  EXPECT_THROW(m.Factor(Vec({0}), {Vec({1, 0}), 0.0}), DomainError);
}

TEST(GradientTest, AgreesWithFiniteDifferences) {
  std::mt19937_64 gen(99);
  for (const LossModel& m : AllModels()) {
    for (int i = 0; i < 20; ++i) {
      testing::FdPoint pt = testing::SmoothPoint(m, 3, 1e-3, gen);
      Eigen::VectorXd g = m.Gradient(pt.theta, pt.obs);
      Eigen::VectorXd fd =
          testing::FiniteDifferenceGradient(m, pt.theta, pt.obs, 1e-6);
      const double scale = std::max(g.norm(), 1e-3);
      EXPECT_LE((fd - g).norm() / scale, 1e-6)
          << FamilyName(m.family()) << " point " << i;
    }
  }
}

TEST(HessianFactorTest, HuberTailIsFlat) {
  LossModel m = LossModel::HuberLinear(1.345);
  HessianFactor f = m.Factor(Vec({0, 0}), {Vec({2, 2}), 10.0});
  EXPECT_EQ(f.m, Vec({0, 0}));
}

TEST(HessianFactorTest, OuterProductAgreesWithFiniteDifferences) {
  std::mt19937_64 gen(7);
  for (const LossModel& m : AllModels()) {
    for (int i = 0; i < 20; ++i) {
      testing::FdPoint pt = testing::SmoothPoint(m, 3, 1e-2, gen);
      HessianFactor f = m.Factor(pt.theta, pt.obs);
      Eigen::MatrixXd fd =
          testing::FiniteDifferenceHessian(m, pt.theta, pt.obs, 1e-4);
      EXPECT_LE((f.m * f.m.transpose() - fd).cwiseAbs().maxCoeff(), 1e-4)
          << FamilyName(m.family()) << " point " << i;
    }
  }
}

TEST(TermsTest, MatchGradientAndFactor) {
  std::mt19937_64 gen(3);
  for (const LossModel& m : AllModels()) {
    for (int i = 0; i < 50; ++i) {
      testing::FdPoint pt = testing::SmoothPoint(m, 4, 0.0, gen);
      GradientTerms t = m.Terms(pt.theta, pt.obs);
      EXPECT_EQ(-t.gradient_scale * pt.obs.x, m.Gradient(pt.theta, pt.obs));
      EXPECT_GE(t.hessian_scale, 0.0);
    }
  }
}

TEST(SensitivityTest, Examples) {
  EXPECT_NEAR(LossModel::HuberLinear(1.345).GradientSensitivity().value(),
              2.0 * std::sqrt(2.0) * 1.345, 1e-14);
  EXPECT_NEAR(LossModel::HuberLinear(1.345).GradientSensitivity().value(),
              3.80424, 1e-5);
  EXPECT_NEAR(LossModel::Logistic().GradientSensitivity().value(),
              2.0 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(LossModel::Expectile(1.0, 0.9).GradientSensitivity().value(),
              2.0 * std::sqrt(2.0) * 0.9, 1e-14);
  EXPECT_NEAR(LossModel::Expectile(1.0, 0.1).GradientSensitivity().value(),
              2.0 * std::sqrt(2.0) * 0.9, 1e-14);
}

// Heavy-tailed covariates, far-off parameters and outlying responses.
TEST(BoundsTest, HoldUnderAdversarialDraws) {
  std::mt19937_64 gen(2718);
  std::cauchy_distribution<double> cauchy(0.0, 3.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (const LossModel& m : AllModels()) {
    const double b0 = m.GradientBound() * (1.0 + 1e-12);
    const double b1 = m.HessianBound() * (1.0 + 1e-12);
    for (int i = 0; i < 10000; ++i) {
      const int p = 1 + i % 6;
      Eigen::VectorXd x(p + 1), theta(p + 1);
      x(0) = 1.0;
      for (int j = 1; j <= p; ++j) x(j) = coin(gen) ? cauchy(gen) : unif(gen);
      // Put some draws right at the weight boundary ||x||^2 = 2.
      if (i % 10 == 0) x *= std::sqrt(2.0) / x.norm();
      for (int j = 0; j <= p; ++j) theta(j) = 100.0 * cauchy(gen);
      double y = m.family() == Family::kLogistic ? (coin(gen) ? 1.0 : 0.0)
                                                 : 1e3 * cauchy(gen);
      Observation obs{x, y};
      ASSERT_LE(m.Gradient(theta, obs).norm(), b0) << FamilyName(m.family());
      ASSERT_LE(m.Factor(theta, obs).m.squaredNorm(), b1)
          << FamilyName(m.family());
    }
  }
}

}  // namespace
}  // namespace ldpsgd
