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

#ifndef LDPSGD_SIM_HARNESS_H_
#define LDPSGD_SIM_HARNESS_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ldpsgd/inference.h"
#include "ldpsgd/models.h"
#include "ldpsgd/privacy.h"
#include "ldpsgd/sgd.h"

namespace ldpsgd {

enum class CovarianceStructure { kIdentity, kAutoregressive };

std::string CovarianceName(CovarianceStructure s);
CovarianceStructure ParseCovariance(const std::string& name);  // "identity", "ar"

// Monte Carlo design: x = (1, s) with s ~ N(0, Sigma), Sigma either I_p or
// {0.5^|j-k|}; y = x'theta0 + eps with eps ~ N(0, noise_sd^2) for the
// Huber and expectile families, y ~ Bernoulli(sigmoid(x'theta0)) for logistic.
struct SimDesign {
  Family family = Family::kHuberLinear;
  double c = 1.345;
  double tau = 0.5;
  int p = 3;  // covariates, excluding the intercept
  int64_t n = 200000;
  PrivacyBudget budget = PrivacyBudget(1.0);
  CovarianceStructure sigma = CovarianceStructure::kIdentity;
  Eigen::VectorXd theta0;  // empty: the all-ones vector of length p + 1
  double noise_sd = 0.5;
  int replications = 200;
  std::vector<double> levels{0.95};
  std::vector<int64_t> checkpoints;  // empty: {n}
  StepSchedule schedule;
  uint64_t seed = 1;
  double kappa1 = 1e-3;
  double kappa2 = 1e-3;
  // Also run a noise-free pass on the same stream and report PI / RS.
  bool include_baseline = false;

  LossModel Model() const;
  Eigen::VectorXd Truth() const;
  Eigen::MatrixXd CovariateCovariance() const;
  std::vector<int64_t> Checkpoints() const;  // sorted, de-duplicated
  void Validate() const;
};

// Noise stream ids of replication r.
uint64_t DataStream(int replication);
uint64_t SgdStream(int replication);
uint64_t PluginStream(int replication);

// Lazily generates the observation stream of one replication. Deterministic
// in (design.seed, replication); satisfies ObservationSource.
class ObservationGenerator {
 public:
  ObservationGenerator(const SimDesign& design, int replication);

  bool operator()(Observation& obs);
  int64_t produced() const { return produced_; }

 private:
  Family family_;
  int64_t n_;
  double noise_sd_;
  Eigen::VectorXd theta0_;
  Eigen::MatrixXd chol_;  // lower Cholesky factor of Sigma
  Eigen::VectorXd z_;
  NoiseSource rng_;
  int64_t produced_ = 0;
};

// Convenience for tests and small designs.
std::vector<Observation> GenerateStream(const SimDesign& design,
                                        int replication);

// One interval for one coefficient at one checkpoint.
struct IntervalRecord {
  int replication = 0;
  int64_t n = 0;
  std::string method;  // "PPI", "PRS" (private) or "PI", "RS" (non-private)
  double level = 0.95;
  int coefficient = 0;  // 0 is the intercept
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double truth = 0.0;

  bool covers() const { return lower <= truth && truth <= upper; }
  double length() const { return upper - lower; }
};

// Final-checkpoint state of one pass.
struct PassSummary {
  bool is_private = false;
  Eigen::VectorXd theta_bar;
  Eigen::MatrixXd sigma_hat;    // plug-in sandwich
  Eigen::VectorXd vhat_diag;    // random-scaling diagonal
};

struct ReplicationResult {
  int replication = 0;
  std::vector<IntervalRecord> records;
  std::vector<PassSummary> passes;  // design budget first, then baseline
};

// Generates one stream, runs one LDP-SGD pass (plus the baseline pass when
// requested) and evaluates every method at every checkpoint and level. The
// table must cover 1 - (1 - level) / 2 for every design level. Errors are
// rethrown as IndexedError tagged with the replication index.
ReplicationResult RunReplication(const SimDesign& design, int replication,
                                 const CriticalValueTable& table);

// All replications, in index order, spread over worker threads.
std::vector<ReplicationResult> RunReplications(const SimDesign& design,
                                               const CriticalValueTable& table,
                                               int threads = 0);

struct SummaryRow {
  std::string method;
  int64_t n = 0;
  double level = 0.95;
  double cp = 0.0;     // in [0, 1]
  double cp_se = 0.0;  // sd of block-wise CP
  double al = 0.0;
  double al_se = 0.0;  // sd of block-wise AL
  std::vector<double> coefficient_cp;  // index j - 1 for coefficient j
  std::vector<double> coefficient_al;
};

struct SimulationReport {
  std::vector<SummaryRow> rows;
  int replications = 0;
  int blocks = 0;
  double wall_seconds = 0.0;
  int threads = 0;

  // Throws DomainError if no row matches.
  const SummaryRow& Row(const std::string& method, int64_t n,
                        double level) const;
};

// CP and AL averaged over the non-intercept coefficients. Standard errors are
// the standard deviation across (up to) four equal blocks of replications.
SimulationReport Aggregate(const std::vector<ReplicationResult>& results,
                           const SimDesign& design);

}  // namespace ldpsgd

#endif  // LDPSGD_SIM_HARNESS_H_
