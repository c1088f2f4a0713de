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

#ifndef LDPSGD_ANALYZE_H_
#define LDPSGD_ANALYZE_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ldpsgd/dataset.h"
#include "ldpsgd/inference.h"
#include "ldpsgd/models.h"
#include "ldpsgd/privacy.h"
#include "ldpsgd/sgd.h"

namespace ldpsgd {

struct AnalyzeOptions {
  Family family = Family::kHuberLinear;
  double c = 1.345;
  double tau = 0.5;
  PrivacyBudget budget = PrivacyBudget(1.0);
  StepSchedule schedule;
  Eigen::VectorXd initial;  // empty: zero vector
  double kappa1 = 1e-3;
  double kappa2 = 1e-3;
  double level = 0.95;
  int trajectory_points = 20;
  uint64_t seed = 1;

  LossModel Model() const;
};

struct TrajectoryPoint {
  int64_t n = 0;
  Eigen::VectorXd theta_bar;
  std::vector<ConfidenceInterval> plugin;
  std::vector<ConfidenceInterval> random_scaling;
};

struct AnalysisReport {
  std::vector<std::string> columns;
  std::string response;
  std::string family;
  int64_t n = 0;
  double level = 0.95;
  bool is_private = false;
  double mu = 0.0;                     // budget of the iterate sequence
  double plugin_release_budget = 0.0;  // per plug-in release
  int plugin_releases = 0;
  Eigen::VectorXd ols;                 // offline non-private reference
  std::vector<TrajectoryPoint> trajectory;  // last point is the final fit

  const TrajectoryPoint& final_point() const { return trajectory.back(); }
};

// Checkpoints ceil(total * k / points), k = 1..points, de-duplicated.
std::vector<int64_t> TrajectoryCheckpoints(int64_t total, int points);

// One LDP-SGD pass over the rows in file order, with private plug-in and
// random-scaling intervals at every trajectory checkpoint. Each checkpoint is
// a separate plug-in release costing sqrt(3) mu.
AnalysisReport Analyze(const Dataset& data, const AnalyzeOptions& options,
                       const CriticalValueTable& table);

}  // namespace ldpsgd

#endif  // LDPSGD_ANALYZE_H_
