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

#ifndef LDPSGD_INFERENCE_H_
#define LDPSGD_INFERENCE_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ldpsgd/models.h"
#include "ldpsgd/privacy.h"

namespace ldpsgd {

enum class IntervalMethod { kPluginPrivate, kPluginNonPrivate, kRandomScaling };

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  IntervalMethod method = IntervalMethod::kPluginPrivate;

  double center() const { return 0.5 * (lower + upper); }
  double length() const { return upper - lower; }
  bool Covers(double value) const { return lower <= value && value <= upper; }
};

// Online accumulators for the random-scaling studentizer
//
//   U_n = sum_b S_b S_b^T,  v_n = sum_b b S_b,  S_b = sum_{i<=b} theta_i = b theta_bar_b
//
// updated as U_n = U_{n-1} + n^2 theta_bar_n theta_bar_n^T and
// v_n = v_{n-1} + n^2 theta_bar_n, so each step costs O(p^2).
class RandomScalingState {
 public:
  explicit RandomScalingState(Eigen::Index dim);

  // Throws SequencingError unless n == this->n() + 1.
  void Update(const Eigen::VectorXd& theta_bar, int64_t n);

  // V_n = (U_n - theta_bar v_n^T - v_n theta_bar^T
  //        + theta_bar theta_bar^T sum_b b^2) / n^2.
  // Throws UndefinedStateError before the first update.
  Eigen::MatrixXd VHat(const Eigen::VectorXd& theta_bar) const;
  // Diagonal of VHat without forming the full matrix.
  Eigen::VectorXd VHatDiagonal(const Eigen::VectorXd& theta_bar) const;

  const Eigen::MatrixXd& u() const { return u_; }
  const Eigen::VectorXd& v() const { return v_; }
  double sum_b2() const { return sum_b2_; }
  int64_t n() const { return n_; }

 private:
  Eigen::MatrixXd u_;
  Eigen::VectorXd v_;
  double sum_b2_ = 0.0;
  int64_t n_ = 0;
};

// The privatized Hessian and gradient-covariance estimates before
// eigenvalue flooring.
struct SandwichMoments {
  Eigen::MatrixXd a;
  Eigen::MatrixXd s;
};

// Running sums of m m^T and Psi Psi^T, both evaluated at the pre-update
// iterate theta_{i-1}. Privatized on query by the matrix Gaussian mechanism.
class PluginCovarianceState {
 public:
  explicit PluginCovarianceState(Eigen::Index dim, double kappa1 = 1e-3,
                                 double kappa2 = 1e-3);

  void Update(const Eigen::VectorXd& gradient, const HessianFactor& factor);
  // Equivalent rank-one update from the scalar gradient terms at x.
  void Update(const Eigen::VectorXd& x, const GradientTerms& terms);

  // A_n = H/n + (2 B1 / (n mu)) M1 and
  // S_n = G/n + (4 B0^2 / mu^2) I + (2 B0^2 / (n mu)) M2.
  // Under the infinite budget both noise terms and the inflation vanish.
  // `add_matrix_noise = false` keeps the inflation but drops M1 and M2.
  SandwichMoments Moments(const LossModel& model, const PrivacyBudget& budget,
                          NoiseSource& rng, bool add_matrix_noise = true) const;

  // Floors the spectra of the privatized moments at kappa1 / kappa2 and
  // returns A*^{-1} S* A*^{-1}. Throws UndefinedStateError when n == 0.
  Eigen::MatrixXd Sandwich(const LossModel& model, const PrivacyBudget& budget,
                           NoiseSource& rng) const;

  Eigen::MatrixXd HessianSum() const;
  Eigen::MatrixXd GramSum() const;
  int64_t n() const { return n_; }
  double kappa1() const { return kappa1_; }
  double kappa2() const { return kappa2_; }

 private:
  // Only the lower triangles are maintained.
  Eigen::MatrixXd hessian_sum_;
  Eigen::MatrixXd gram_sum_;
  int64_t n_ = 0;
  double kappa1_;
  double kappa2_;
};

// Symmetric matrix with its eigenvalues replaced by max(kappa, lambda).
Eigen::MatrixXd FloorEigenvalues(const Eigen::MatrixXd& sym, double kappa);

// A*^{-1} S* A*^{-1} with floored spectra.
Eigen::MatrixXd SandwichFromMoments(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& s, double kappa1,
                                    double kappa2);

// Standard normal quantile.
double NormalQuantile(double probability);

// Quantiles of the random-scaling pivot
//   W(1) / [int_0^1 {W(r) - r W(1)}^2 dr]^{1/2}.
// Lookup between stored levels interpolates linearly.
class CriticalValueTable {
 public:
  struct Entry {
    double level;
    double value;
  };

  CriticalValueTable() = default;
  // Entries are sorted by level; values must be non-decreasing.
  explicit CriticalValueTable(std::vector<Entry> entries);

  // Throws DomainError when `level` is outside the stored range.
  double At(double level) const;
  bool Contains(double level) const;
  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Two whitespace-separated columns (level, value), one entry per line;
  // lines starting with '#' are comments.
  std::string Serialize() const;
  static CriticalValueTable Parse(const std::string& text);

 private:
  std::vector<Entry> entries_;
};

struct CriticalValueOptions {
  int64_t paths = 1000000;
  int grid = 1000;
  uint64_t seed = 20240101;
  int threads = 0;  // 0: hardware concurrency (or LDPSGD_THREADS)
};

// Monte Carlo quantiles of the pivot from discretized Brownian paths:
// i.i.d. N(0, 1/grid) increments, integral by a Riemann sum on the grid.
// Requires paths >= 1e4 and grid >= 1e3. Paths are split into fixed chunks
// with their own noise streams, so the result does not depend on the number
// of worker threads.
CriticalValueTable SimulateCriticalValues(std::span<const double> levels,
                                          const CriticalValueOptions& options);

// Pivot draws, exposed for distributional tests.
std::vector<double> SimulatePivotSamples(const CriticalValueOptions& options);

// theta_bar_j +/- z_{1-(1-level)/2} sqrt(sigma_hat_jj / n).
ConfidenceInterval PluginInterval(double theta_bar_j, double sigma_hat_jj,
                                  int64_t n, double level,
                                  IntervalMethod method =
                                      IntervalMethod::kPluginPrivate);

// theta_bar_j +/- z^R_{1-(1-level)/2} sqrt(vhat_jj / n).
ConfidenceInterval RandomScalingInterval(double theta_bar_j, double vhat_jj,
                                         int64_t n, double level,
                                         const CriticalValueTable& table);

// Worker count: LDPSGD_THREADS if set, else hardware concurrency.
int ResolveThreadCount(int requested);

}  // namespace ldpsgd

#endif  // LDPSGD_INFERENCE_H_
