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

// Independent reference computations shared by the unit, integration and
// acceptance tests. Nothing here calls the closed forms under test.

#ifndef LDPSGD_TESTS_ORACLES_H_
#define LDPSGD_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ldpsgd/models.h"

namespace ldpsgd::testing {

// Central differences of the loss.
inline Eigen::VectorXd FiniteDifferenceGradient(const LossModel& model,
                                                const Eigen::VectorXd& theta,
                                                const Observation& obs,
                                                double h) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd up = theta, down = theta;
    up(i) += h;
    down(i) -= h;
    g(i) = (model.Loss(up, obs) - model.Loss(down, obs)) / (2.0 * h);
  }
  return g;
}

// Four-point second differences of the loss.
inline Eigen::MatrixXd FiniteDifferenceHessian(const LossModel& model,
                                               const Eigen::VectorXd& theta,
                                               const Observation& obs,
                                               double h) {
  const Eigen::Index p = theta.size();
  Eigen::MatrixXd hess(p, p);
  auto at = [&](Eigen::Index i, double di, Eigen::Index j, double dj) {
    Eigen::VectorXd t = theta;
    t(i) += di;
    t(j) += dj;
    return model.Loss(t, obs);
  };
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      hess(i, j) = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) +
                    at(i, -h, j, -h)) /
                   (4.0 * h * h);
    }
  }
  return hess;
}

struct FdPoint {
  Eigen::VectorXd theta;
  Observation obs;
};

// Random (theta, z) whose residual stays at least `margin` away from every
// kink of the loss so that finite differences are valid.
inline FdPoint SmoothPoint(const LossModel& model, int p, double margin,
                           std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> label(0, 1);
  for (;;) {
    FdPoint pt;
    pt.theta.resize(p + 1);
    pt.obs.x.resize(p + 1);
    pt.obs.x(0) = 1.0;
    for (int j = 0; j <= p; ++j) pt.theta(j) = normal(gen);
    for (int j = 1; j <= p; ++j) pt.obs.x(j) = 1.5 * normal(gen);
    const double eta = pt.obs.x.dot(pt.theta);
    if (model.family() == Family::kLogistic) {
      pt.obs.y = label(gen);
      return pt;
    }
    pt.obs.y = eta + 2.0 * model.c() * normal(gen);
    const double r = std::abs(pt.obs.y - eta);
    // Kinks sit at |r| = c and, for the expectile, at r = 0. The Mallow
    // weight does not depend on theta.
    if (std::abs(r - model.c()) > margin && r > margin) return pt;
  }
}

// Running means of the iterates, theta_bar_b = (1/b) sum_{i<=b} theta_i.
inline std::vector<Eigen::VectorXd> RunningMeans(
    const std::vector<Eigen::VectorXd>& iterates) {
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(iterates.front().size());
  for (size_t b = 0; b < iterates.size(); ++b) {
    sum += iterates[b];
    out.push_back(sum / static_cast<double>(b + 1));
  }
  return out;
}

// V_n = (1/n) sum_b [(1/sqrt n) sum_{i<=b} (theta_i - theta_bar_n)]^{(x)2}
// evaluated literally as a double sum.
inline Eigen::MatrixXd DirectVHat(const std::vector<Eigen::VectorXd>& iterates) {
  const size_t n = iterates.size();
  const Eigen::Index p = iterates.front().size();
  Eigen::VectorXd bar = Eigen::VectorXd::Zero(p);
  for (const auto& t : iterates) bar += t;
  bar /= static_cast<double>(n);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(p, p);
  for (size_t b = 1; b <= n; ++b) {
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(p);
    for (size_t i = 0; i < b; ++i) partial += iterates[i] - bar;
    partial /= std::sqrt(static_cast<double>(n));
    v += partial * partial.transpose();
  }
  return v / static_cast<double>(n);
}

// U_n = sum_b S_b S_b^T and v_n = sum_b b S_b from the partial sums
// S_b = sum_{i<=b} theta_i.
inline Eigen::MatrixXd DirectU(const std::vector<Eigen::VectorXd>& iterates) {
  const Eigen::Index p = iterates.front().size();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(p, p);
  for (size_t b = 1; b <= iterates.size(); ++b) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
    for (size_t i = 0; i < b; ++i) s += iterates[i];
    u += s * s.transpose();
  }
  return u;
}

inline Eigen::VectorXd DirectV(const std::vector<Eigen::VectorXd>& iterates) {
  const Eigen::Index p = iterates.front().size();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  for (size_t b = 1; b <= iterates.size(); ++b) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
    for (size_t i = 0; i < b; ++i) s += iterates[i];
    v += static_cast<double>(b) * s;
  }
  return v;
}

// Anderson-Darling statistic against N(0, 1) after standardizing with the
// sample mean and sd, with the small-sample correction for estimated
// parameters. Reject normality at the 1% level when above 1.035.
inline double AndersonDarlingNormal(std::vector<double> xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  for (double& x : xs) x = (x - mean) / sd;
  std::sort(xs.begin(), xs.end());
  auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  double s = 0.0;
  const size_t m = xs.size();
  for (size_t i = 0; i < m; ++i) {
    const double fi = std::clamp(cdf(xs[i]), 1e-300, 1.0 - 1e-16);
    const double fr = std::clamp(cdf(xs[m - 1 - i]), 1e-300, 1.0 - 1e-16);
    s += (2.0 * static_cast<double>(i) + 1.0) *
         (std::log(fi) + std::log1p(-fr));
  }
  const double a2 = -n - s / n;
  return a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
}

inline constexpr double kAndersonDarlingCritical1Pct = 1.035;

// Ordinary least-squares slope of y on x.
inline double OlsSlope(const std::vector<double>& x,
                       const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace ldpsgd::testing

#endif  // LDPSGD_TESTS_ORACLES_H_
