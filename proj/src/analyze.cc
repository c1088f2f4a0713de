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

#include "ldpsgd/analyze.h"

#include <algorithm>
#include <cmath>

#include "ldpsgd/errors.h"

namespace ldpsgd {

LossModel AnalyzeOptions::Model() const {
  switch (family) {
    case Family::kHuberLinear:
      return LossModel::HuberLinear(c);
    case Family::kLogistic:
      return LossModel::Logistic();
    case Family::kExpectile:
      return LossModel::Expectile(c, tau);
  }
  throw DomainError("unknown family");
}

std::vector<int64_t> TrajectoryCheckpoints(int64_t total, int points) {
  if (total < 1 || points < 1) {
    throw DomainError("trajectory needs a positive length and point count");
  }
  std::vector<int64_t> out;
  for (int k = 1; k <= points; ++k) {
    // ceil(total * k / points) in integer arithmetic.
    out.push_back((total * k + points - 1) / points);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

AnalysisReport Analyze(const Dataset& data, const AnalyzeOptions& options,
                       const CriticalValueTable& table) {
  if (data.rows() == 0) throw DomainError("empty dataset");
  const LossModel model = options.Model();
  const Eigen::Index dim = data.x.cols();
  Eigen::VectorXd initial = options.initial.size() == 0
                                ? Eigen::VectorXd::Zero(dim)
                                : options.initial;
  if (initial.size() != dim) {
    throw DomainError("initial point has the wrong dimension");
  }
  const double rs_quantile = 1.0 - (1.0 - options.level) / 2.0;
  if (!table.Contains(rs_quantile)) {
    throw DomainError("critical value table does not cover level " +
                      std::to_string(options.level));
  }

  AnalysisReport report;
  report.columns = data.columns;
  report.response = data.response;
  report.family = FamilyName(options.family);
  report.n = data.rows();
  report.level = options.level;
  report.is_private = !options.budget.infinite();
  if (report.is_private) {
    report.mu = options.budget.mu();
    report.plugin_release_budget = PluginReleaseBudget(report.mu);
  }
  report.ols = LeastSquares(data);

  SgdState sgd(model, options.schedule, options.budget, initial,
               NoiseSource(options.seed, 0));
  PluginCovarianceState plugin(dim, options.kappa1, options.kappa2);
  RandomScalingState rs(dim);
  NoiseSource plugin_rng(options.seed, 1);
  const IntervalMethod plugin_method = report.is_private
                                           ? IntervalMethod::kPluginPrivate
                                           : IntervalMethod::kPluginNonPrivate;

  const std::vector<int64_t> checkpoints =
      TrajectoryCheckpoints(data.rows(), options.trajectory_points);
  size_t next = 0;
  Observation obs;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    obs.x = data.x.row(i).transpose();
    obs.y = data.y[i];
    GradientTerms terms;
    try {
      terms = sgd.Step(obs);
    } catch (const Error& e) {
      throw IndexedError("row", i + 1, e.what());
    }
    plugin.Update(obs.x, terms);
    rs.Update(sgd.theta_bar(), sgd.n());
    if (next >= checkpoints.size() || sgd.n() != checkpoints[next]) continue;
    ++next;

    TrajectoryPoint point;
    point.n = sgd.n();
    point.theta_bar = sgd.theta_bar();
    const Eigen::MatrixXd sigma = plugin.Sandwich(model, options.budget, plugin_rng);
    ++report.plugin_releases;
    const Eigen::VectorXd vhat = rs.VHatDiagonal(point.theta_bar);
    for (Eigen::Index j = 0; j < dim; ++j) {
      point.plugin.push_back(PluginInterval(point.theta_bar[j], sigma(j, j),
                                            point.n, options.level,
                                            plugin_method));
      point.random_scaling.push_back(RandomScalingInterval(
          point.theta_bar[j], vhat[j], point.n, options.level, table));
    }
    report.trajectory.push_back(std::move(point));
  }
  return report;
}

}  // namespace ldpsgd
