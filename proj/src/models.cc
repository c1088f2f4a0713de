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

#include <algorithm>
#include <cmath>

#include "ldpsgd/errors.h"

namespace ldpsgd {
namespace {

double Sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Huber score min(1, c/|r|) * r, continuous at the knot.
double HuberScore(double r, double c) {
  const double a = std::abs(r);
  return a <= c ? r : std::copysign(c, r);
}

double HuberLoss(double r, double c) {
  const double a = std::abs(r);
  return a <= c ? 0.5 * r * r : c * a - 0.5 * c * c;
}

double ExpectileWeight(double r, double tau) { return r < 0.0 ? 1.0 - tau : tau; }

void CheckDims(const Eigen::VectorXd& theta, const Observation& obs) {
  if (theta.size() != obs.x.size()) {
    throw DomainError("theta has dimension " + std::to_string(theta.size()) +
                      " but x has dimension " + std::to_string(obs.x.size()));
  }
  if (theta.size() == 0) throw DomainError("zero-dimensional parameter");
  if (!obs.x.allFinite() || !std::isfinite(obs.y)) {
    throw DomainError("observation has non-finite components");
  }
}

}  // namespace

std::string FamilyName(Family family) {
  switch (family) {
    case Family::kHuberLinear:
      return "huber";
    case Family::kLogistic:
      return "logistic";
    case Family::kExpectile:
      return "expectile";
  }
  return "unknown";
}

Family ParseFamily(const std::string& name) {
  if (name == "huber" || name == "linear") return Family::kHuberLinear;
  if (name == "logistic") return Family::kLogistic;
  if (name == "expectile") return Family::kExpectile;
  throw ParseError("unknown model family '" + name + "'");
}

double MallowWeight(const Eigen::VectorXd& x) {
  const double sq = x.squaredNorm();
  if (sq <= 2.0) return 1.0;
  return 2.0 / sq;
}

LossModel LossModel::HuberLinear(double c) {
  if (!std::isfinite(c) || c <= 0.0) {
    throw DomainError("Huber truncation c must be positive");
  }
  return LossModel(Family::kHuberLinear, c, 0.5);
}

LossModel LossModel::Logistic() { return LossModel(Family::kLogistic, 1.0, 0.5); }

LossModel LossModel::Expectile(double c, double tau) {
  if (!std::isfinite(c) || c <= 0.0) {
    throw DomainError("Huber truncation c must be positive");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("expectile location tau must lie in (0, 1)");
  }
  return LossModel(Family::kExpectile, c, tau);
}

double LossModel::GradientBound() const {
  switch (family_) {
    case Family::kHuberLinear:
      return std::sqrt(2.0) * c_;
    case Family::kLogistic:
      return std::sqrt(2.0);
    case Family::kExpectile:
      return std::sqrt(2.0) * c_ * std::max(tau_, 1.0 - tau_);
  }
  return 0.0;
}

// ||x||^2 w(x) <= 2 for the Mallow weight; the logistic curvature adds a
// factor sigma(1 - sigma) <= 1/4.
double LossModel::HessianBound() const {
  switch (family_) {
    case Family::kHuberLinear:
      return 2.0;
    case Family::kLogistic:
      return 0.5;
    case Family::kExpectile:
      return 2.0 * std::max(tau_, 1.0 - tau_);
  }
  return 0.0;
}

Sensitivity LossModel::GradientSensitivity() const {
  return Sensitivity(2.0 * GradientBound());
}

GradientTerms LossModel::Terms(double linear_predictor, double y,
                               double weight) const {
  GradientTerms t;
  switch (family_) {
    case Family::kHuberLinear: {
      const double r = y - linear_predictor;
      t.gradient_scale = HuberScore(r, c_) * weight;
      t.hessian_scale = std::abs(r) <= c_ ? weight : 0.0;
      break;
    }
    case Family::kLogistic: {
      const double s = Sigmoid(linear_predictor);
      t.gradient_scale = (y - s) * weight;
      t.hessian_scale = s * (1.0 - s) * weight;
      break;
    }
    case Family::kExpectile: {
      const double r = y - linear_predictor;
      const double a = ExpectileWeight(r, tau_);
      t.gradient_scale = a * HuberScore(r, c_) * weight;
      t.hessian_scale = std::abs(r) <= c_ ? a * weight : 0.0;
      break;
    }
  }
  return t;
}

GradientTerms LossModel::Terms(const Eigen::VectorXd& theta,
                               const Observation& obs) const {
  CheckDims(theta, obs);
  return Terms(obs.x.dot(theta), obs.y, MallowWeight(obs.x));
}

double LossModel::Loss(const Eigen::VectorXd& theta,
                       const Observation& obs) const {
  CheckDims(theta, obs);
  const double eta = obs.x.dot(theta);
  const double w = MallowWeight(obs.x);
  switch (family_) {
    case Family::kHuberLinear:
      return HuberLoss(obs.y - eta, c_) * w;
    case Family::kLogistic: {
      // log(1 + exp(eta)) computed without overflow.
      const double softplus =
          eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
      return (softplus - obs.y * eta) * w;
    }
    case Family::kExpectile: {
      const double r = obs.y - eta;
      return ExpectileWeight(r, tau_) * HuberLoss(r, c_) * w;
    }
  }
  return 0.0;
}

Eigen::VectorXd LossModel::Gradient(const Eigen::VectorXd& theta,
                                    const Observation& obs) const {
  const GradientTerms t = Terms(theta, obs);
  return -t.gradient_scale * obs.x;
}

HessianFactor LossModel::Factor(const Eigen::VectorXd& theta,
                                const Observation& obs) const {
  const GradientTerms t = Terms(theta, obs);
  return HessianFactor{std::sqrt(t.hessian_scale) * obs.x};
}

}  // namespace ldpsgd
