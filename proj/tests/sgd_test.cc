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

#include "ldpsgd/sgd.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ldpsgd/errors.h"
#include "ldpsgd/sim_harness.h"
#include "oracles.h"

namespace ldpsgd {
namespace {

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

SgdState NonPrivate(const LossModel& m, Eigen::VectorXd init) {
  return SgdState(m, StepSchedule{}, PrivacyBudget::Infinite(), std::move(init),
                  NoiseSource(1, 0));
}

// Replays a vector of observations; counts how often it is polled.
struct CountingSource {
  const std::vector<Observation>* data;
  size_t next = 0;
  int64_t polls = 0;
  bool operator()(Observation& obs) {
    ++polls;
    if (next == data->size()) return false;
    obs = (*data)[next++];
    return true;
  }
};

std::vector<Observation> LinearData(int p, int64_t n, uint64_t seed) {
  SimDesign d;
  d.p = p;
  d.n = n;
  d.seed = seed;
  return GenerateStream(d, 0);
}

TEST(StepScheduleTest, Rates) {
  StepSchedule s;
  EXPECT_EQ(s.Rate(1), 0.5);
  const double oracle = 0.5 * std::exp(-0.51 * std::log(100.0));
  EXPECT_NEAR(s.Rate(100), oracle, 1e-15);
  EXPECT_NEAR(s.Rate(100), 0.047747, 5e-6);
  EXPECT_THROW((StepSchedule{0.0, 0.51}.Validate()), DomainError);
  EXPECT_THROW((StepSchedule{0.5, 0.5}.Validate()), DomainError);
  EXPECT_THROW((StepSchedule{0.5, 1.0}.Validate()), DomainError);
}

TEST(StepTest, ZeroResidualIsAFixedPoint) {
  SgdState s = NonPrivate(LossModel::HuberLinear(1e6), Vec({0}));
  s.Step({Vec({1}), 0.0});
  EXPECT_EQ(s.theta(), Vec({0}));
  EXPECT_EQ(s.n(), 1);
}

TEST(StepTest, OneStepArithmetic) {
  SgdState s = NonPrivate(LossModel::HuberLinear(1.345), Vec({0}));
  GradientTerms t = s.Step({Vec({1}), 1.0});
  EXPECT_EQ(t.gradient_scale, 1.0);
  EXPECT_EQ(s.theta(), Vec({0.5}));
  EXPECT_EQ(s.theta_bar(), Vec({0.5}));
}

TEST(StepTest, NoiseVarianceMatchesSensitivity) {
  // B0 = sqrt(2) for c = 1; x = 0 gives a zero gradient at every theta.
  LossModel m = LossModel::HuberLinear(1.0);
  SgdState s(m, StepSchedule{}, PrivacyBudget(1.0), Vec({0, 0}),
             NoiseSource(77, 0));
  constexpr int kSteps = 100000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sumsq = Eigen::Vector2d::Zero();
  Observation obs{Vec({0, 0}), 0.0};
  for (int i = 0; i < kSteps; ++i) {
    Eigen::VectorXd before = s.theta();
    s.Step(obs);
    Eigen::VectorXd inc = (s.theta() - before) / s.schedule().Rate(s.n());
    sum += inc;
    sumsq += inc.cwiseAbs2();
  }
  for (int j = 0; j < 2; ++j) {
    const double mean = sum(j) / kSteps;
    EXPECT_NEAR((sumsq(j) / kSteps - mean * mean) / 8.0, 1.0, 0.03);
  }
}

TEST(StepTest, PerStepBudgets) {
  LossModel m = LossModel::HuberLinear(1.0);
  SgdState s(m, StepSchedule{}, PrivacyBudget::PerStep({1.0, 1e9}), Vec({0}),
             NoiseSource(5, 0));
  Observation obs{Vec({0}), 0.0};
  s.Step(obs);
  const double first = s.theta()(0);
  EXPECT_NE(first, 0.0);
  s.Step(obs);
  // With mu = 1e9 the second increment is negligible.
  EXPECT_NEAR(s.theta()(0), first, 1e-6);
  EXPECT_THROW(s.Step(obs), AccountingError);
  EXPECT_EQ(s.n(), 2);
}

TEST(StepTest, RejectsBadObservationsWithoutMutating) {
  SgdState s(LossModel::HuberLinear(1.0), StepSchedule{}, PrivacyBudget(1.0),
             Vec({0.25, -1}), NoiseSource(3, 0));
  s.Step({Vec({1, 2}), 0.5});
  const Eigen::VectorXd theta = s.theta(), bar = s.theta_bar();
  NoiseSource rng_before = s.rng();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(s.Step({Vec({1, nan}), 0.0}), DomainError);
  EXPECT_THROW(s.Step({Vec({1, 0}), std::numeric_limits<double>::infinity()}),
               DomainError);
  EXPECT_THROW(s.Step({Vec({1, 0, 0}), 0.0}), DomainError);
  EXPECT_EQ(s.theta(), theta);
  EXPECT_EQ(s.theta_bar(), bar);
  EXPECT_EQ(s.n(), 1);
  NoiseSource rng_after = s.rng();
  EXPECT_EQ(rng_before.Normal(), rng_after.Normal());
}

TEST(StepTest, RejectsDegenerateConstruction) {
  EXPECT_THROW(NonPrivate(LossModel::HuberLinear(1.0), Eigen::VectorXd()),
               DomainError);
}

TEST(AveragingTest, RunningMeanEqualsDirectMean) {
  std::vector<Observation> data = LinearData(3, 1000, 4);
  SgdState s(LossModel::HuberLinear(1.345), StepSchedule{}, PrivacyBudget(1.0),
             Eigen::VectorXd::Zero(4), NoiseSource(4, 1));
  std::vector<Eigen::VectorXd> iterates;
  for (const Observation& obs : data) {
    s.Step(obs);
    iterates.push_back(s.theta());
    Eigen::VectorXd direct = Eigen::VectorXd::Zero(4);
    for (const auto& t : iterates) direct += t;
    direct /= static_cast<double>(iterates.size());
    ASSERT_LE((direct - s.theta_bar()).cwiseAbs().maxCoeff(), 1e-12)
        << "n = " << s.n();
  }
}

TEST(RunStreamTest, LengthOneEqualsOneStep) {
  std::vector<Observation> data = LinearData(2, 1, 9);
  LossModel m = LossModel::HuberLinear(1.345);
  CountingSource src{&data};
  SgdState a = RunStream(m, StepSchedule{}, PrivacyBudget(1.0),
                         Eigen::VectorXd::Zero(3), src, NoiseSource(9, 1));
  SgdState b(m, StepSchedule{}, PrivacyBudget(1.0), Eigen::VectorXd::Zero(3),
             NoiseSource(9, 1));
  b.Step(data[0]);
  EXPECT_EQ(a.theta(), b.theta());
  EXPECT_EQ(a.theta_bar(), b.theta_bar());
  EXPECT_EQ(a.n(), 1);
}

TEST(RunStreamTest, TouchesEachObservationOnce) {
  std::vector<Observation> data = LinearData(3, 5000, 10);
  CountingSource src{&data};
  SgdState s = RunStream(LossModel::HuberLinear(1.345), StepSchedule{},
                         PrivacyBudget(2.0), Eigen::VectorXd::Zero(4), src,
                         NoiseSource(10, 1));
  EXPECT_EQ(s.n(), 5000);
  EXPECT_EQ(src.next, data.size());
  EXPECT_EQ(src.polls, 5001);  // the last poll reports exhaustion
}

TEST(RunStreamTest, Deterministic) {
  std::vector<Observation> data = LinearData(3, 3000, 11);
  auto run = [&] {
    CountingSource src{&data};
    return RunStream(LossModel::Logistic(), StepSchedule{}, PrivacyBudget(1.0),
                     Eigen::VectorXd::Zero(4), src, NoiseSource(11, 1));
  };
  SgdState a = run(), b = run();
  EXPECT_EQ(a.theta(), b.theta());
  EXPECT_EQ(a.theta_bar(), b.theta_bar());
}

TEST(RunStreamTest, EmptyStreamFails) {
  std::vector<Observation> data;
  CountingSource src{&data};
  EXPECT_THROW(RunStream(LossModel::HuberLinear(1.0), StepSchedule{},
                         PrivacyBudget(1.0), Eigen::VectorXd::Zero(2), src,
                         NoiseSource(1, 0)),
               DomainError);
}

TEST(RunStreamTest, ReportsOffendingIndex) {
  std::vector<Observation> data = LinearData(2, 10, 12);
  data[6].y = std::numeric_limits<double>::quiet_NaN();
  CountingSource src{&data};
  try {
    RunStream(LossModel::HuberLinear(1.0), StepSchedule{}, PrivacyBudget(1.0),
              Eigen::VectorXd::Zero(3), src, NoiseSource(1, 0));
    FAIL() << "expected an error";
  } catch (const IndexedError& e) {
    EXPECT_EQ(e.index(), 7);
  }
}

TEST(RunStreamTest, NoiseOffMatchesClassicalAveragedSgd) {
  std::vector<Observation> data = LinearData(3, 20000, 13);
  for (const LossModel& m : {LossModel::HuberLinear(1.345),
                             LossModel::Logistic(),
                             LossModel::Expectile(1.0, 0.7)}) {
    SgdState s = NonPrivate(m, Eigen::VectorXd::Zero(4));
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd bar = theta;
    StepSchedule sched;
    for (size_t i = 0; i < data.size(); ++i) {
      const double n = static_cast<double>(i + 1);
      theta -= sched.gamma * std::pow(n, -sched.alpha) *
               m.Gradient(theta, data[i]);
      bar += (theta - bar) / n;
      s.Step(data[i]);
      ASSERT_EQ(s.theta(), theta) << FamilyName(m.family()) << " step " << i;
      ASSERT_EQ(s.theta_bar(), bar);
    }
  }
}

TEST(RunStreamTest, NonPrivateConsistency) {
  SimDesign d;
  d.p = 3;
  d.n = 100000;
  d.seed = 14;
  ObservationGenerator gen(d, 0);
  SgdState s = RunStream(d.Model(), StepSchedule{}, PrivacyBudget::Infinite(),
                         Eigen::VectorXd::Zero(4), gen, NoiseSource(14, 1));
  EXPECT_LE((s.theta_bar() - d.Truth()).norm(), 0.05);
}

}  // namespace
}  // namespace ldpsgd
