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

#ifndef LDPSGD_PRIVACY_H_
#define LDPSGD_PRIVACY_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

namespace ldpsgd {

// Gaussian differential privacy budget. Either a single mu shared by every
// individual, a per-individual sequence mu_1, ..., mu_n, or the infinite
// sentinel that switches every mechanism off.
class PrivacyBudget {
 public:
  // Throws DomainError unless mu is finite and positive.
  explicit PrivacyBudget(double mu);

  static PrivacyBudget Infinite();
  static PrivacyBudget PerStep(std::vector<double> mus);

  bool infinite() const { return infinite_; }

  // Budget of the whole released sequence: mu, or max(mu_i) for per-step
  // budgets. Throws AccountingError for the infinite sentinel.
  double mu() const;

  // Budget spent by the individual contributing step `step` (1-based).
  double MuAt(int64_t step) const;

  const std::vector<double>& per_step() const { return per_step_; }

 private:
  PrivacyBudget() = default;

  bool infinite_ = false;
  double mu_ = 0.0;
  std::vector<double> per_step_;
};

// Global l2 sensitivity of a statistic.
class Sensitivity {
 public:
  explicit Sensitivity(double value);
  double value() const { return value_; }

 private:
  double value_;
};

// Seeded source of randomness. The same (seed, stream) pair always replays
// the same sequence within one build; distinct stream ids give independent
// streams. Normal variates use the ziggurat sampler from Boost.Random.
class NoiseSource {
 public:
  using Engine = std::mt19937_64;

  NoiseSource(uint64_t seed, uint64_t stream);

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  double Normal() { return normal_(engine_); }
  Eigen::VectorXd NormalVector(Eigen::Index dim);
  void FillNormal(Eigen::Ref<Eigen::VectorXd> out);
  double Uniform();  // in [0, 1)
  Engine& engine() { return engine_; }

 private:
  uint64_t seed_;
  uint64_t stream_;
  Engine engine_;
  boost::random::normal_distribution<double> normal_;
};

// Returns value + (sens / mu) * Z with Z standard normal. Identity map under
// the infinite budget. Throws DomainError on non-finite input.
Eigen::VectorXd GaussianMechanism(const Eigen::VectorXd& value,
                                  Sensitivity sens,
                                  const PrivacyBudget& budget,
                                  NoiseSource& rng);

// Symmetric p x p matrix whose upper triangle (diagonal included) holds
// i.i.d. standard normals, mirrored to the lower triangle.
Eigen::MatrixXd SymmetricNoiseMatrix(Eigen::Index dim, NoiseSource& rng);

// Returns matrix + scale * W with W = SymmetricNoiseMatrix. A fresh W is
// drawn on every call; accounting across repeated calls is the caller's job.
// Throws DomainError when the input is not symmetric within 1e-10 or when
// scale is negative or non-finite.
Eigen::MatrixXd MatrixGaussianMechanism(const Eigen::MatrixXd& matrix,
                                        double scale, NoiseSource& rng);

// Parallel composition over disjoint individuals: max of the budgets.
// Throws AccountingError on an empty or non-positive sequence.
double ComposeParallel(std::span<const double> budgets);

// Budget of one joint release of the averaged estimate together with the
// privatized Hessian and gradient-covariance matrices: sqrt(3) * mu.
double PluginReleaseBudget(double mu);

}  // namespace ldpsgd

#endif  // LDPSGD_PRIVACY_H_
