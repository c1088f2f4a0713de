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

#include "ldpsgd/inference.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "ldpsgd/errors.h"

namespace ldpsgd {

RandomScalingState::RandomScalingState(Eigen::Index dim)
    : u_(Eigen::MatrixXd::Zero(dim, dim)), v_(Eigen::VectorXd::Zero(dim)) {
  if (dim == 0) throw DomainError("zero-dimensional parameter");
}

void RandomScalingState::Update(const Eigen::VectorXd& theta_bar, int64_t n) {
  if (n != n_ + 1) {
    throw SequencingError("random scaling update for step " + std::to_string(n) +
                          " after step " + std::to_string(n_));
  }
  if (theta_bar.size() != v_.size()) {
    throw DomainError("random scaling update has the wrong dimension");
  }
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  u_.selfadjointView<Eigen::Lower>().rankUpdate(theta_bar, n2);
  v_.noalias() += n2 * theta_bar;
  sum_b2_ += n2;
  n_ = n;
}

Eigen::MatrixXd RandomScalingState::VHat(const Eigen::VectorXd& theta_bar) const {
  if (n_ == 0) throw UndefinedStateError("random scaling state is empty");
  if (theta_bar.size() != v_.size()) {
    throw DomainError("theta_bar has the wrong dimension");
  }
  const Eigen::MatrixXd u = u_.selfadjointView<Eigen::Lower>();
  const Eigen::MatrixXd cross = theta_bar * v_.transpose();
  Eigen::MatrixXd out = u - cross - cross.transpose() +
                        sum_b2_ * (theta_bar * theta_bar.transpose());
  const double n = static_cast<double>(n_);
  out /= n * n;
  return out;
}

Eigen::VectorXd RandomScalingState::VHatDiagonal(
    const Eigen::VectorXd& theta_bar) const {
  if (n_ == 0) throw UndefinedStateError("random scaling state is empty");
  if (theta_bar.size() != v_.size()) {
    throw DomainError("theta_bar has the wrong dimension");
  }
  const double n = static_cast<double>(n_);
  Eigen::VectorXd out(v_.size());
  for (Eigen::Index j = 0; j < v_.size(); ++j) {
    const double t = theta_bar[j];
    out[j] = (u_(j, j) - 2.0 * t * v_[j] + t * t * sum_b2_) / (n * n);
  }
  return out;
}

PluginCovarianceState::PluginCovarianceState(Eigen::Index dim, double kappa1,
                                             double kappa2)
    : hessian_sum_(Eigen::MatrixXd::Zero(dim, dim)),
      gram_sum_(Eigen::MatrixXd::Zero(dim, dim)),
      kappa1_(kappa1),
      kappa2_(kappa2) {
  if (dim == 0) throw DomainError("zero-dimensional parameter");
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0) || !std::isfinite(kappa1) ||
      !std::isfinite(kappa2)) {
    throw DomainError("eigenvalue floors must be positive");
  }
}

void PluginCovarianceState::Update(const Eigen::VectorXd& gradient,
                                   const HessianFactor& factor) {
  const Eigen::Index p = hessian_sum_.rows();
  if (gradient.size() != p || factor.m.size() != p) {
    throw DomainError("plug-in update has the wrong dimension");
  }
  hessian_sum_.selfadjointView<Eigen::Lower>().rankUpdate(factor.m, 1.0);
  gram_sum_.selfadjointView<Eigen::Lower>().rankUpdate(gradient, 1.0);
  ++n_;
}

void PluginCovarianceState::Update(const Eigen::VectorXd& x,
                                   const GradientTerms& terms) {
  if (x.size() != hessian_sum_.rows()) {
    throw DomainError("plug-in update has the wrong dimension");
  }
  if (terms.hessian_scale != 0.0) {
    hessian_sum_.selfadjointView<Eigen::Lower>().rankUpdate(x,
                                                           terms.hessian_scale);
  }
  gram_sum_.selfadjointView<Eigen::Lower>().rankUpdate(
      x, terms.gradient_scale * terms.gradient_scale);
  ++n_;
}

Eigen::MatrixXd PluginCovarianceState::HessianSum() const {
  return hessian_sum_.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd PluginCovarianceState::GramSum() const {
  return gram_sum_.selfadjointView<Eigen::Lower>();
}

SandwichMoments PluginCovarianceState::Moments(const LossModel& model,
                                               const PrivacyBudget& budget,
                                               NoiseSource& rng,
                                               bool add_matrix_noise) const {
  if (n_ == 0) throw UndefinedStateError("plug-in state is empty");
  const double n = static_cast<double>(n_);
  const Eigen::Index p = hessian_sum_.rows();
  SandwichMoments out{HessianSum() / n, GramSum() / n};
  if (budget.infinite()) return out;

  const double mu = budget.mu();
  const double b0 = model.GradientBound();
  const double b1 = model.HessianBound();
  out.s += (4.0 * b0 * b0 / (mu * mu)) * Eigen::MatrixXd::Identity(p, p);
  if (add_matrix_noise) {
    out.a = MatrixGaussianMechanism(out.a, 2.0 * b1 / (n * mu), rng);
    out.s = MatrixGaussianMechanism(out.s, 2.0 * b0 * b0 / (n * mu), rng);
  }
  return out;
}

Eigen::MatrixXd PluginCovarianceState::Sandwich(const LossModel& model,
                                                const PrivacyBudget& budget,
                                                NoiseSource& rng) const {
  const SandwichMoments m = Moments(model, budget, rng);
  return SandwichFromMoments(m.a, m.s, kappa1_, kappa2_);
}

Eigen::MatrixXd FloorEigenvalues(const Eigen::MatrixXd& sym, double kappa) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw DomainError("eigendecomposition failed");
  }
  const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(kappa);
  const Eigen::MatrixXd& g = eig.eigenvectors();
  return g * d.asDiagonal() * g.transpose();
}

Eigen::MatrixXd SandwichFromMoments(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& s, double kappa1,
                                    double kappa2) {
  if (a.rows() != a.cols() || s.rows() != s.cols() || a.rows() != s.rows()) {
    throw DomainError("sandwich moments must be square and conformable");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) {
    throw DomainError("eigendecomposition failed");
  }
  const Eigen::VectorXd inv = eig.eigenvalues().cwiseMax(kappa1).cwiseInverse();
  const Eigen::MatrixXd& g = eig.eigenvectors();
  const Eigen::MatrixXd a_inv = g * inv.asDiagonal() * g.transpose();
  const Eigen::MatrixXd s_star = FloorEigenvalues(s, kappa2);
  Eigen::MatrixXd out = a_inv * s_star * a_inv;
  return 0.5 * (out + out.transpose());
}

double NormalQuantile(double probability) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw DomainError("normal quantile needs a probability in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal(), probability);
}

CriticalValueTable::CriticalValueTable(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.level < b.level; });
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (!(e.level > 0.0 && e.level < 1.0) || !std::isfinite(e.value)) {
      throw DomainError("critical value entries need levels in (0, 1)");
    }
    if (i > 0 && (e.level == entries_[i - 1].level ||
                  e.value < entries_[i - 1].value)) {
      throw DomainError("critical values must be strictly indexed and monotone");
    }
  }
}

bool CriticalValueTable::Contains(double level) const {
  return !entries_.empty() && level >= entries_.front().level &&
         level <= entries_.back().level;
}

double CriticalValueTable::At(double level) const {
  if (!Contains(level)) {
    throw DomainError("critical value table does not cover level " +
                      std::to_string(level));
  }
  auto hi = std::lower_bound(
      entries_.begin(), entries_.end(), level,
      [](const Entry& e, double l) { return e.level < l; });
  if (hi->level == level) return hi->value;
  auto lo = hi - 1;
  const double w = (level - lo->level) / (hi->level - lo->level);
  return lo->value + w * (hi->value - lo->value);
}

std::string CriticalValueTable::Serialize() const {
  std::string out;
  char buf[96];
  for (const Entry& e : entries_) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", e.level, e.value);
    out += buf;
  }
  return out;
}

CriticalValueTable CriticalValueTable::Parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Entry> entries;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    Entry e{};
    std::string extra;
    if (!(fields >> e.level >> e.value) || (fields >> extra)) {
      throw ParseError("critical value table line " + std::to_string(line_no) +
                       ": expected two numeric columns");
    }
    entries.push_back(e);
  }
  try {
    return CriticalValueTable(std::move(entries));
  } catch (const DomainError& e) {
    throw ParseError(std::string("critical value table: ") + e.what());
  }
}

namespace {

void CheckLevel(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }
}

}  // namespace

ConfidenceInterval PluginInterval(double theta_bar_j, double sigma_hat_jj,
                                  int64_t n, double level,
                                  IntervalMethod method) {
  CheckLevel(level);
  if (!(sigma_hat_jj >= 0.0)) throw DomainError("negative variance estimate");
  if (n < 1) throw DomainError("interval needs n >= 1");
  const double z = NormalQuantile(1.0 - (1.0 - level) / 2.0);
  const double half = z * std::sqrt(sigma_hat_jj / static_cast<double>(n));
  return {theta_bar_j - half, theta_bar_j + half, level, method};
}

ConfidenceInterval RandomScalingInterval(double theta_bar_j, double vhat_jj,
                                         int64_t n, double level,
                                         const CriticalValueTable& table) {
  CheckLevel(level);
  // Cancellation in the closed form can leave tiny negative values.
  if (vhat_jj < 0.0 && vhat_jj > -1e-12) vhat_jj = 0.0;
  if (!(vhat_jj >= 0.0)) throw DomainError("negative variance estimate");
  if (n < 1) throw DomainError("interval needs n >= 1");
  const double z = table.At(1.0 - (1.0 - level) / 2.0);
  const double half = z * std::sqrt(vhat_jj / static_cast<double>(n));
  return {theta_bar_j - half, theta_bar_j + half, level,
          IntervalMethod::kRandomScaling};
}

int ResolveThreadCount(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LDPSGD_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace ldpsgd
