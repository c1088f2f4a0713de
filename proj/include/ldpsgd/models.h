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

#ifndef LDPSGD_MODELS_H_
#define LDPSGD_MODELS_H_

#include <string>

#include <Eigen/Dense>

#include "ldpsgd/privacy.h"

namespace ldpsgd {

struct Observation {
  Eigen::VectorXd x;  // covariates, usually with a leading intercept 1
  double y = 0.0;     // response; {0, 1} label for logistic regression
};

enum class Family { kHuberLinear, kLogistic, kExpectile };

std::string FamilyName(Family family);
Family ParseFamily(const std::string& name);  // "huber", "logistic", "expectile"

// Hessian of the loss written as m * m^T.
struct HessianFactor {
  Eigen::VectorXd m;
};

// Every supported loss has gradient -g * x and Hessian h * x x^T for scalars
// (g, h) that depend on (theta, z) only through x^T theta. Hot loops use
// these scalars directly to avoid forming vectors.
struct GradientTerms {
  double gradient_scale = 0.0;  // Psi = -gradient_scale * x
  double hessian_scale = 0.0;   // Hessian = hessian_scale * x x^T
};

// Covariate downweighting min(1, 2 / ||x||^2); 1 at x = 0.
double MallowWeight(const Eigen::VectorXd& x);

// One of the three Mallow-weighted regression losses:
//   HuberLinear  h_c(y - x'theta) w(x)
//   Logistic     {log(1 + exp(x'theta)) - y x'theta} w(x)
//   Expectile    |tau - 1{y - x'theta < 0}| h_c(y - x'theta) w(x)
// The weight keeps ||Psi|| <= B0 for every (theta, z).
class LossModel {
 public:
  static LossModel HuberLinear(double c);
  static LossModel Logistic();
  static LossModel Expectile(double c, double tau);

  Family family() const { return family_; }
  double c() const { return c_; }
  double tau() const { return tau_; }

  // B0: uniform bound on ||Psi(theta, z)||_2.
  double GradientBound() const;
  // B1: uniform bound on ||m(theta, z)||_2^2.
  double HessianBound() const;
  // Global sensitivity of Psi, 2 * B0.
  Sensitivity GradientSensitivity() const;

  double Loss(const Eigen::VectorXd& theta, const Observation& obs) const;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& theta,
                           const Observation& obs) const;
  HessianFactor Factor(const Eigen::VectorXd& theta,
                       const Observation& obs) const;

  // Scalars at linear predictor x'theta; `weight` is MallowWeight(x).
  GradientTerms Terms(double linear_predictor, double y, double weight) const;
  // Checked variant used by the public API.
  GradientTerms Terms(const Eigen::VectorXd& theta,
                      const Observation& obs) const;

 private:
  LossModel(Family family, double c, double tau)
      : family_(family), c_(c), tau_(tau) {}

  Family family_;
  double c_;
  double tau_;
};

}  // namespace ldpsgd

#endif  // LDPSGD_MODELS_H_
