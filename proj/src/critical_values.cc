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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "ldpsgd/errors.h"
#include "ldpsgd/inference.h"

namespace ldpsgd {
namespace {

constexpr int64_t kPathsPerChunk = 10000;

// Pivot of one discretized Brownian path on `grid` equal steps.
double PivotDraw(NoiseSource& rng, int grid, std::vector<double>& path) {
  const double sd = 1.0 / std::sqrt(static_cast<double>(grid));
  double w = 0.0;
  for (int k = 0; k < grid; ++k) {
    w += sd * rng.Normal();
    path[static_cast<size_t>(k)] = w;
  }
  const double w1 = w;
  double integral = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double r = static_cast<double>(k + 1) / grid;
    const double bridge = path[static_cast<size_t>(k)] - r * w1;
    integral += bridge * bridge;
  }
  integral /= grid;
  return w1 / std::sqrt(integral);
}

// Type-7 empirical quantile of sorted data.
double SortedQuantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> SimulatePivotSamples(const CriticalValueOptions& options) {
  if (options.paths < 10000) {
    throw DomainError("critical values need at least 1e4 paths");
  }
  if (options.grid < 1000) {
    throw DomainError("critical values need a grid of at least 1e3 points");
  }
  std::vector<double> draws(static_cast<size_t>(options.paths));
  const int64_t chunks = (options.paths + kPathsPerChunk - 1) / kPathsPerChunk;
  std::atomic<int64_t> next{0};

  auto worker = [&]() {
    std::vector<double> path(static_cast<size_t>(options.grid));
    for (int64_t c = next++; c < chunks; c = next++) {
      NoiseSource rng(options.seed, static_cast<uint64_t>(c));
      const int64_t begin = c * kPathsPerChunk;
      const int64_t end = std::min(options.paths, begin + kPathsPerChunk);
      for (int64_t i = begin; i < end; ++i) {
        draws[static_cast<size_t>(i)] = PivotDraw(rng, options.grid, path);
      }
    }
  };

  const int threads = static_cast<int>(
      std::min<int64_t>(ResolveThreadCount(options.threads), chunks));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return draws;
}

CriticalValueTable SimulateCriticalValues(std::span<const double> levels,
                                          const CriticalValueOptions& options) {
  for (double l : levels) {
    if (!(l > 0.0 && l < 1.0)) {
      throw DomainError("critical value levels must lie in (0, 1)");
    }
  }
  std::vector<double> draws = SimulatePivotSamples(options);
  std::sort(draws.begin(), draws.end());
  std::vector<double> sorted_levels(levels.begin(), levels.end());
  std::sort(sorted_levels.begin(), sorted_levels.end());
  sorted_levels.erase(std::unique(sorted_levels.begin(), sorted_levels.end()),
                      sorted_levels.end());
  std::vector<CriticalValueTable::Entry> entries;
  entries.reserve(sorted_levels.size());
  for (double l : sorted_levels) entries.push_back({l, SortedQuantile(draws, l)});
  return CriticalValueTable(std::move(entries));
}

}  // namespace ldpsgd
