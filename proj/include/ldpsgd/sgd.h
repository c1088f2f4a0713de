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

#ifndef LDPSGD_SGD_H_
#define LDPSGD_SGD_H_

#include <concepts>
#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ldpsgd/errors.h"
#include "ldpsgd/models.h"
#include "ldpsgd/privacy.h"

namespace ldpsgd {

// Polynomially decaying step size gamma_n = gamma * n^(-alpha), 1/2 < alpha < 1.
struct StepSchedule {
  double gamma = 0.5;
  double alpha = 0.51;

  void Validate() const;
  double Rate(int64_t n) const;
};

// Locally private SGD with Polyak-Ruppert averaging:
//
//   theta_n = theta_{n-1} - gamma_n (Psi(theta_{n-1}, z_n) + (2 B0 / mu_n) xi_n)
//   theta_bar_n = theta_bar_{n-1} + (theta_n - theta_bar_{n-1}) / n
//
// xi_n is a fresh standard normal vector. With the infinite budget the noise
// term vanishes and this is classical averaged SGD.
class SgdState {
 public:
  SgdState(LossModel model, StepSchedule schedule, PrivacyBudget budget,
           Eigen::VectorXd initial, NoiseSource rng);

  // Absorbs one observation. Returns the gradient terms evaluated at the
  // pre-step iterate so callers can feed online covariance estimators. On
  // error the state is left unchanged.
  GradientTerms Step(const Observation& obs);

  const Eigen::VectorXd& theta() const { return theta_; }
  // Equal to the initial point while n == 0.
  const Eigen::VectorXd& theta_bar() const { return theta_bar_; }
  int64_t n() const { return n_; }
  Eigen::Index dim() const { return theta_.size(); }

  const LossModel& model() const { return model_; }
  const StepSchedule& schedule() const { return schedule_; }
  const PrivacyBudget& budget() const { return budget_; }
  const NoiseSource& rng() const { return rng_; }

 private:
  LossModel model_;
  StepSchedule schedule_;
  PrivacyBudget budget_;
  NoiseSource rng_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd theta_bar_;
  Eigen::VectorXd noise_;
  Eigen::VectorXd direction_;
  int64_t n_ = 0;
};

// A pull-based stream: fills `obs` and returns true, or returns false at the
// end. Lets RunStream consume arbitrarily long sources in constant memory.
template <typename S>
concept ObservationSource = requires(S s, Observation& obs) {
  { s(obs) } -> std::convertible_to<bool>;
};

// One pass over `source` in order. Throws DomainError on an empty stream and
// IndexedError (1-based observation index) when a step fails.
template <ObservationSource Source>
SgdState RunStream(const LossModel& model, const StepSchedule& schedule,
                   const PrivacyBudget& budget, const Eigen::VectorXd& initial,
                   Source&& source, NoiseSource rng) {
  SgdState state(model, schedule, budget, initial, std::move(rng));
  Observation obs;
  while (source(obs)) {
    try {
      state.Step(obs);
    } catch (const Error& e) {
      throw IndexedError("observation", state.n() + 1, e.what());
    }
  }
  if (state.n() == 0) throw DomainError("empty observation stream");
  return state;
}

}  // namespace ldpsgd

#endif  // LDPSGD_SGD_H_
