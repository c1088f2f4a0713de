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

#include "ldpsgd/sim_harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "ldpsgd/errors.h"

namespace ldpsgd {

std::string CovarianceName(CovarianceStructure s) {
  return s == CovarianceStructure::kIdentity ? "identity" : "ar";
}

CovarianceStructure ParseCovariance(const std::string& name) {
  if (name == "identity") return CovarianceStructure::kIdentity;
  if (name == "ar" || name == "ar0.5") return CovarianceStructure::kAutoregressive;
  throw ParseError("unknown covariance structure '" + name + "'");
}

LossModel SimDesign::Model() const {
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

Eigen::VectorXd SimDesign::Truth() const {
  if (theta0.size() == 0) return Eigen::VectorXd::Ones(p + 1);
  return theta0;
}

Eigen::MatrixXd SimDesign::CovariateCovariance() const {
  Eigen::MatrixXd sigma_mat = Eigen::MatrixXd::Identity(p, p);
  if (sigma == CovarianceStructure::kAutoregressive) {
    for (int j = 0; j < p; ++j) {
      for (int k = 0; k < p; ++k) sigma_mat(j, k) = std::pow(0.5, std::abs(j - k));
    }
  }
  return sigma_mat;
}

std::vector<int64_t> SimDesign::Checkpoints() const {
  std::vector<int64_t> out = checkpoints.empty() ? std::vector<int64_t>{n}
                                                 : checkpoints;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void SimDesign::Validate() const {
  if (p < 1) throw DomainError("design needs p >= 1");
  if (n < 1) throw DomainError("design needs n >= 1");
  if (replications < 1) throw DomainError("design needs at least one replication");
  if (theta0.size() != 0 && theta0.size() != p + 1) {
    throw DomainError("theta0 must have p + 1 entries (leading intercept)");
  }
  if (!(noise_sd > 0.0)) throw DomainError("noise_sd must be positive");
  if (levels.empty()) throw DomainError("design needs at least one level");
  for (double l : levels) {
    if (!(l > 0.0 && l < 1.0)) throw DomainError("levels must lie in (0, 1)");
  }
  for (int64_t cp : Checkpoints()) {
    if (cp < 1 || cp > n) throw DomainError("checkpoints must lie in [1, n]");
  }
  schedule.Validate();
  Model();
}

uint64_t DataStream(int replication) { return 3ull * replication; }
uint64_t SgdStream(int replication) { return 3ull * replication + 1; }
uint64_t PluginStream(int replication) { return 3ull * replication + 2; }

ObservationGenerator::ObservationGenerator(const SimDesign& design,
                                           int replication)
    : family_(design.family),
      n_(design.n),
      noise_sd_(design.noise_sd),
      theta0_(design.Truth()),
      z_(design.p),
      rng_(design.seed, DataStream(replication)) {
  Eigen::LLT<Eigen::MatrixXd> llt(design.CovariateCovariance());
  chol_ = llt.matrixL();
}

bool ObservationGenerator::operator()(Observation& obs) {
  if (produced_ >= n_) return false;
  const Eigen::Index p = z_.size();
  obs.x.resize(p + 1);
  rng_.FillNormal(z_);
  obs.x[0] = 1.0;
  obs.x.tail(p).noalias() = chol_.triangularView<Eigen::Lower>() * z_;
  const double eta = obs.x.dot(theta0_);
  if (family_ == Family::kLogistic) {
    const double prob = 1.0 / (1.0 + std::exp(-eta));
    obs.y = rng_.Uniform() < prob ? 1.0 : 0.0;
  } else {
    obs.y = eta + noise_sd_ * rng_.Normal();
  }
  ++produced_;
  return true;
}

std::vector<Observation> GenerateStream(const SimDesign& design,
                                        int replication) {
  ObservationGenerator gen(design, replication);
  std::vector<Observation> out;
  out.reserve(static_cast<size_t>(design.n));
  Observation obs;
  while (gen(obs)) out.push_back(obs);
  return out;
}

namespace {

void RunPass(const SimDesign& design, const PrivacyBudget& budget,
             int replication, const CriticalValueTable& table,
             ReplicationResult& result) {
  const bool is_private = !budget.infinite();
  const std::string plugin_label = is_private ? "PPI" : "PI";
  const std::string rs_label = is_private ? "PRS" : "RS";
  const IntervalMethod plugin_method = is_private
                                           ? IntervalMethod::kPluginPrivate
                                           : IntervalMethod::kPluginNonPrivate;
  const LossModel model = design.Model();
  const Eigen::VectorXd truth = design.Truth();
  const Eigen::Index dim = truth.size();
  const std::vector<int64_t> checkpoints = design.Checkpoints();

  ObservationGenerator gen(design, replication);
  SgdState sgd(model, design.schedule, budget, Eigen::VectorXd::Zero(dim),
               NoiseSource(design.seed, SgdStream(replication)));
  PluginCovarianceState plugin(dim, design.kappa1, design.kappa2);
  RandomScalingState rs(dim);
  NoiseSource plugin_rng(design.seed, PluginStream(replication));

  PassSummary summary;
  summary.is_private = is_private;
  size_t next_checkpoint = 0;
  Observation obs;
  while (gen(obs)) {
    const GradientTerms terms = sgd.Step(obs);
    plugin.Update(obs.x, terms);
    rs.Update(sgd.theta_bar(), sgd.n());
    if (next_checkpoint >= checkpoints.size() ||
        sgd.n() != checkpoints[next_checkpoint]) {
      continue;
    }
    ++next_checkpoint;
    const Eigen::VectorXd& theta_bar = sgd.theta_bar();
    const Eigen::MatrixXd sigma_hat = plugin.Sandwich(model, budget, plugin_rng);
    const Eigen::VectorXd vhat = rs.VHatDiagonal(theta_bar);
    for (double level : design.levels) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        const ConfidenceInterval pi = PluginInterval(
            theta_bar[j], sigma_hat(j, j), sgd.n(), level, plugin_method);
        const ConfidenceInterval ri = RandomScalingInterval(
            theta_bar[j], vhat[j], sgd.n(), level, table);
        for (const auto& [label, ci] :
             {std::pair{plugin_label, pi}, std::pair{rs_label, ri}}) {
          result.records.push_back({replication, sgd.n(), label, level,
                                    static_cast<int>(j), theta_bar[j], ci.lower,
                                    ci.upper, truth[j]});
        }
      }
    }
    summary.theta_bar = theta_bar;
    summary.sigma_hat = sigma_hat;
    summary.vhat_diag = vhat;
  }
  result.passes.push_back(std::move(summary));
}

}  // namespace

ReplicationResult RunReplication(const SimDesign& design, int replication,
                                 const CriticalValueTable& table) {
  ReplicationResult result;
  result.replication = replication;
  try {
    design.Validate();
    for (double level : design.levels) {
      if (!table.Contains(1.0 - (1.0 - level) / 2.0)) {
        throw DomainError("critical value table does not cover level " +
                          std::to_string(level));
      }
    }
    RunPass(design, design.budget, replication, table, result);
    if (design.include_baseline && !design.budget.infinite()) {
      RunPass(design, PrivacyBudget::Infinite(), replication, table, result);
    }
  } catch (const Error& e) {
    throw IndexedError("replication", replication, e.what());
  }
  return result;
}

std::vector<ReplicationResult> RunReplications(const SimDesign& design,
                                               const CriticalValueTable& table,
                                               int threads) {
  design.Validate();
  std::vector<ReplicationResult> results(
      static_cast<size_t>(design.replications));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&]() {
    for (int r = next++; r < design.replications; r = next++) {
      try {
        results[static_cast<size_t>(r)] = RunReplication(design, r, table);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = design.replications;
      }
    }
  };
  const int count =
      std::min(ResolveThreadCount(threads), design.replications);
  std::vector<std::thread> pool;
  for (int t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

const SummaryRow& SimulationReport::Row(const std::string& method, int64_t n,
                                        double level) const {
  for (const SummaryRow& row : rows) {
    if (row.method == method && row.n == n && std::abs(row.level - level) < 1e-12) {
      return row;
    }
  }
  throw DomainError("no summary row for " + method + " at n = " +
                    std::to_string(n));
}

namespace {

double SampleSd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct CellTotals {
  // [replication][coefficient - 1]
  std::vector<std::vector<double>> covered;
  std::vector<std::vector<double>> length;
};

}  // namespace

SimulationReport Aggregate(const std::vector<ReplicationResult>& results,
                           const SimDesign& design) {
  if (results.empty()) throw DomainError("aggregate needs at least one replication");
  const int reps = static_cast<int>(results.size());
  const int p = design.p;

  using Key = std::tuple<std::string, int64_t, double>;
  std::map<Key, CellTotals> cells;
  for (int r = 0; r < reps; ++r) {
    for (const IntervalRecord& rec : results[static_cast<size_t>(r)].records) {
      if (rec.coefficient < 1 || rec.coefficient > p) continue;
      CellTotals& cell = cells[{rec.method, rec.n, rec.level}];
      if (cell.covered.empty()) {
        cell.covered.assign(static_cast<size_t>(reps),
                            std::vector<double>(static_cast<size_t>(p), 0.0));
        cell.length = cell.covered;
      }
      const auto j = static_cast<size_t>(rec.coefficient - 1);
      cell.covered[static_cast<size_t>(r)][j] = rec.covers() ? 1.0 : 0.0;
      cell.length[static_cast<size_t>(r)][j] = rec.length();
    }
  }

  SimulationReport report;
  report.replications = reps;
  report.blocks = std::min(4, reps);
  const int blocks = report.blocks;
  for (const auto& [key, cell] : cells) {
    SummaryRow row;
    std::tie(row.method, row.n, row.level) = key;
    row.coefficient_cp.assign(static_cast<size_t>(p), 0.0);
    row.coefficient_al.assign(static_cast<size_t>(p), 0.0);
    std::vector<double> block_cp(static_cast<size_t>(blocks), 0.0);
    std::vector<double> block_al(static_cast<size_t>(blocks), 0.0);
    std::vector<int> block_size(static_cast<size_t>(blocks), 0);
    std::vector<int64_t> covered_count(static_cast<size_t>(p), 0);
    for (int r = 0; r < reps; ++r) {
      // Replications split into contiguous, near-equal blocks.
      const auto b = static_cast<size_t>(static_cast<int64_t>(r) * blocks / reps);
      double rep_cp = 0.0;
      double rep_al = 0.0;
      for (int j = 0; j < p; ++j) {
        const double cov = cell.covered[static_cast<size_t>(r)][static_cast<size_t>(j)];
        const double len = cell.length[static_cast<size_t>(r)][static_cast<size_t>(j)];
        covered_count[static_cast<size_t>(j)] += cov > 0.0 ? 1 : 0;
        row.coefficient_al[static_cast<size_t>(j)] += len / reps;
        rep_cp += cov / p;
        rep_al += len / p;
      }
      row.al += rep_al / reps;
      block_cp[b] += rep_cp;
      block_al[b] += rep_al;
      ++block_size[b];
    }
    for (int b = 0; b < blocks; ++b) {
      block_cp[static_cast<size_t>(b)] /= block_size[static_cast<size_t>(b)];
      block_al[static_cast<size_t>(b)] /= block_size[static_cast<size_t>(b)];
    }
    int64_t total_covered = 0;
    for (int j = 0; j < p; ++j) {
      total_covered += covered_count[static_cast<size_t>(j)];
      row.coefficient_cp[static_cast<size_t>(j)] =
          static_cast<double>(covered_count[static_cast<size_t>(j)]) / reps;
    }
    row.cp = static_cast<double>(total_covered) / (static_cast<double>(reps) * p);
    row.cp_se = SampleSd(block_cp);
    row.al_se = SampleSd(block_al);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace ldpsgd
