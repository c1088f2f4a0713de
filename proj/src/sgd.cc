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

namespace ldpsgd {

void StepSchedule::Validate() const {
  if (!std::isfinite(gamma) || gamma <= 0.0) {
    throw DomainError("step-size scale gamma must be positive");
  }
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw DomainError("step-size exponent alpha must lie in (1/2, 1)");
  }
}

double StepSchedule::Rate(int64_t n) const {
  return gamma * std::pow(static_cast<double>(n), -alpha);
}

SgdState::SgdState(LossModel model, StepSchedule schedule, PrivacyBudget budget,
                   Eigen::VectorXd initial, NoiseSource rng)
    : model_(model),
      schedule_(schedule),
      budget_(std::move(budget)),
      rng_(std::move(rng)),
      theta_(std::move(initial)),
      noise_(theta_.size()),
      direction_(theta_.size()) {
  schedule_.Validate();
  if (theta_.size() == 0) throw DomainError("zero-dimensional parameter");
  if (!theta_.allFinite()) throw DomainError("non-finite initial point");
  theta_bar_ = theta_;
}

GradientTerms SgdState::Step(const Observation& obs) {
  if (obs.x.size() != theta_.size()) {
    throw DomainError("observation dimension " + std::to_string(obs.x.size()) +
                      " does not match parameter dimension " +
                      std::to_string(theta_.size()));
  }
  if (!obs.x.allFinite() || !std::isfinite(obs.y)) {
    throw DomainError("observation has non-finite components");
  }
  const int64_t n = n_ + 1;
  // Resolve the budget before touching any state.
  const double noise_scale =
      budget_.infinite() ? 0.0 : 2.0 * model_.GradientBound() / budget_.MuAt(n);

  const GradientTerms terms =
      model_.Terms(obs.x.dot(theta_), obs.y, MallowWeight(obs.x));
  const double rate = schedule_.Rate(n);

  direction_.noalias() = -terms.gradient_scale * obs.x;
  if (noise_scale > 0.0) {
    rng_.FillNormal(noise_);
    direction_.noalias() += noise_scale * noise_;
  }
  theta_.noalias() -= rate * direction_;
  theta_bar_ += (theta_ - theta_bar_) / static_cast<double>(n);
  n_ = n;
  return terms;
}

}  // namespace ldpsgd
