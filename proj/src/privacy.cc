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

#include "ldpsgd/privacy.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ldpsgd/errors.h"

namespace ldpsgd {

PrivacyBudget::PrivacyBudget(double mu) : mu_(mu) {
  if (!std::isfinite(mu) || mu <= 0.0) {
    throw DomainError("privacy budget mu must be finite and positive, got " +
                      std::to_string(mu));
  }
}

PrivacyBudget PrivacyBudget::Infinite() {
  PrivacyBudget b;
  b.infinite_ = true;
  return b;
}

PrivacyBudget PrivacyBudget::PerStep(std::vector<double> mus) {
  for (double m : mus) {
    if (!std::isfinite(m) || m <= 0.0) {
      throw DomainError("per-step privacy budgets must be finite and positive");
    }
  }
  PrivacyBudget b;
  b.mu_ = ComposeParallel(mus);
  b.per_step_ = std::move(mus);
  return b;
}

double PrivacyBudget::mu() const {
  if (infinite_) throw AccountingError("infinite budget has no finite mu");
  return mu_;
}

double PrivacyBudget::MuAt(int64_t step) const {
  if (infinite_) throw AccountingError("infinite budget has no finite mu");
  if (per_step_.empty()) return mu_;
  if (step < 1 || step > static_cast<int64_t>(per_step_.size())) {
    throw AccountingError("no per-step budget recorded for step " +
                          std::to_string(step));
  }
  return per_step_[static_cast<size_t>(step - 1)];
}

Sensitivity::Sensitivity(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw DomainError("sensitivity must be finite and non-negative");
  }
}

NoiseSource::NoiseSource(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream),
                    static_cast<uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

Eigen::VectorXd NoiseSource::NormalVector(Eigen::Index dim) {
  Eigen::VectorXd out(dim);
  FillNormal(out);
  return out;
}

void NoiseSource::FillNormal(Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal_(engine_);
}

double NoiseSource::Uniform() {
  return std::generate_canonical<double, 53>(engine_);
}

Eigen::VectorXd GaussianMechanism(const Eigen::VectorXd& value,
                                  Sensitivity sens,
                                  const PrivacyBudget& budget,
                                  NoiseSource& rng) {
  if (!value.allFinite()) {
    throw DomainError("gaussian mechanism input has non-finite components");
  }
  if (budget.infinite()) return value;
  const double scale = sens.value() / budget.mu();
  Eigen::VectorXd out = value;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += scale * rng.Normal();
  return out;
}

Eigen::MatrixXd SymmetricNoiseMatrix(Eigen::Index dim, NoiseSource& rng) {
  Eigen::MatrixXd w(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      w(i, j) = rng.Normal();
      w(j, i) = w(i, j);
    }
  }
  return w;
}

Eigen::MatrixXd MatrixGaussianMechanism(const Eigen::MatrixXd& matrix,
                                        double scale, NoiseSource& rng) {
  if (matrix.rows() != matrix.cols()) {
    throw DomainError("matrix mechanism needs a square matrix");
  }
  if (!matrix.allFinite()) {
    throw DomainError("matrix mechanism input has non-finite entries");
  }
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("matrix mechanism input is not symmetric");
  }
  if (!std::isfinite(scale) || scale < 0.0) {
    throw DomainError("matrix mechanism scale must be finite and non-negative");
  }
  if (scale == 0.0) return matrix;
  return matrix + scale * SymmetricNoiseMatrix(matrix.rows(), rng);
}

double ComposeParallel(std::span<const double> budgets) {
  if (budgets.empty()) {
    throw AccountingError("parallel composition of an empty budget sequence");
  }
  for (double b : budgets) {
    if (!(b > 0.0)) throw AccountingError("budgets must be positive");
  }
  return *std::max_element(budgets.begin(), budgets.end());
}

double PluginReleaseBudget(double mu) {
  if (!std::isfinite(mu) || mu <= 0.0) {
    throw DomainError("privacy budget mu must be finite and positive");
  }
  return std::sqrt(3.0) * mu;
}

}  // namespace ldpsgd
