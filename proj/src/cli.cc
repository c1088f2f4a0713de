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

#include "ldpsgd/cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"
#include "ldpsgd/analyze.h"
#include "ldpsgd/dataset.h"
#include "ldpsgd/errors.h"
#include "ldpsgd/report_io.h"
#include "ldpsgd/sim_harness.h"

namespace ldpsgd {
namespace {

constexpr char kCacheTag[] = "# ldpsgd critical values";

std::string CacheHeader(const CriticalValueOptions& o) {
  return std::string(kCacheTag) + "\n# paths=" + std::to_string(o.paths) +
         " grid=" + std::to_string(o.grid) + " seed=" + std::to_string(o.seed) +
         "\n";
}

// Quantile levels the random-scaling intervals need for confidence `levels`.
std::vector<double> PivotLevels(const std::vector<double>& levels) {
  std::vector<double> out;
  for (double l : levels) out.push_back(1.0 - (1.0 - l) / 2.0);
  return out;
}

void AddModelOptions(CLI::App* cmd, std::string& family, double& c, double& tau,
                     std::string& mu, double& gamma, double& alpha,
                     double& kappa1, double& kappa2) {
  cmd->add_option("--family", family, "huber | logistic | expectile")
      ->capture_default_str();
  cmd->add_option("--c", c, "Huber truncation")->capture_default_str();
  cmd->add_option("--tau", tau, "expectile location")->capture_default_str();
  cmd->add_option("--mu", mu, "GDP budget, or inf for no noise")
      ->capture_default_str();
  cmd->add_option("--gamma", gamma, "step-size scale")->capture_default_str();
  cmd->add_option("--alpha", alpha, "step-size decay exponent")
      ->capture_default_str();
  cmd->add_option("--kappa1", kappa1, "eigenvalue floor for A")
      ->capture_default_str();
  cmd->add_option("--kappa2", kappa2, "eigenvalue floor for S")
      ->capture_default_str();
}

void Emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    WriteFileAtomically(path, content);
  }
}

std::string FormatSummary(const SimulationReport& report) {
  std::string s;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-6s %9s %6s %8s %8s %10s %10s\n", "method",
                "n", "level", "CP(%)", "(se)", "AL", "(se)");
  s += buf;
  for (const SummaryRow& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-6s %9lld %6.3f %8.2f %8.2f %10.5f %10.5f\n",
                  r.method.c_str(), static_cast<long long>(r.n), r.level,
                  100.0 * r.cp, 100.0 * r.cp_se, r.al, r.al_se);
    s += buf;
  }
  return s;
}

// Splices the `key = value` lines of a subcommand's --config file into the
// argument list as --key=value tokens. Keys also given on the command line
// are skipped so that flags override the file.
std::vector<std::string> ExpandConfig(const std::vector<std::string>& args) {
  static const std::vector<std::string> kCommands{"simulate", "analyze"};
  auto sub = std::find_first_of(args.begin(), args.end(), kCommands.begin(),
                                kCommands.end());
  if (sub == args.end()) return args;
  std::string path;
  std::vector<std::string> rest;
  for (auto it = sub + 1; it != args.end(); ++it) {
    if (*it == "--config") {
      if (it + 1 == args.end()) throw ParseError("--config needs a file");
      path = *++it;
    } else if (it->rfind("--config=", 0) == 0) {
      path = it->substr(9);
    } else {
      rest.push_back(*it);
    }
  }
  if (path.empty()) return args;
  if (!std::filesystem::exists(path)) {
    throw ParseError("config file '" + path + "' does not exist");
  }
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::ParseError& e) {
    throw ParseError("config file '" + path + "': " + e.what());
  }
  auto given = [&rest](const std::string& flag) {
    return std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> out(args.begin(), sub + 1);
  for (const CLI::ConfigItem& item : items) {
    // The TOML reader emits section markers as items named "++" / "--".
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) {
      throw ParseError("config file '" + path + "': unexpected section or dotted key '" +
                       item.fullname() + "'");
    }
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (item.inputs.empty()) {
      out.push_back(flag);
    }
    for (const std::string& value : item.inputs) out.push_back(flag + "=" + value);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

PrivacyBudget ParseBudget(const std::string& text) {
  if (text == "inf" || text == "infinite" || text == "none") {
    return PrivacyBudget::Infinite();
  }
  double v = 0.0;
  size_t used = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError("privacy budget '" + text + "' is not a number or 'inf'");
  }
  if (used != text.size()) {
    throw ParseError("privacy budget '" + text + "' is not a number or 'inf'");
  }
  return PrivacyBudget(v);
}

CriticalValueTable CachedCriticalValues(const std::vector<double>& levels,
                                        const CriticalValueOptions& options,
                                        const std::string& cache_path,
                                        bool* cache_hit) {
  if (cache_hit != nullptr) *cache_hit = false;
  std::vector<double> wanted = levels;
  if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
    const std::string text = ReadFile(cache_path);
    const std::string header = CacheHeader(options);
    if (text.rfind(header, 0) == 0) {
      const CriticalValueTable cached = CriticalValueTable::Parse(text);
      bool covered = true;
      for (double l : levels) {
        const bool exact = std::any_of(
            cached.entries().begin(), cached.entries().end(),
            [l](const CriticalValueTable::Entry& e) { return e.level == l; });
        covered = covered && exact;
      }
      if (covered) {
        if (cache_hit != nullptr) *cache_hit = true;
        return cached;
      }
      for (const auto& e : cached.entries()) wanted.push_back(e.level);
    }
  }
  const CriticalValueTable table = SimulateCriticalValues(wanted, options);
  if (!cache_path.empty()) {
    WriteFileAtomically(cache_path, CacheHeader(options) + table.Serialize());
  }
  return table;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Locally private SGD with online confidence intervals", "ldpsgd"};
  app.require_subcommand(1);
  uint64_t seed = 1;
  int threads = 0;
  app.add_option("--seed", seed, "global random seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0: automatic)")
      ->envname("LDPSGD_THREADS");

  // Shared Monte Carlo settings for random-scaling critical values.
  int64_t rs_paths = 1000000;
  int rs_grid = 1000;
  std::string cv_cache;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage study");
  std::string config_path;
  sim->add_option("--config", config_path, "design file (key = value)");
  std::string sim_family = "huber";
  double sim_c = 1.345, sim_tau = 0.5, sim_gamma = 0.5, sim_alpha = 0.51;
  double sim_kappa1 = 1e-3, sim_kappa2 = 1e-3, noise_sd = 0.5;
  std::string sim_mu = "1";
  int sim_p = 3, replications = 200;
  int64_t sim_n = 200000;
  std::string sigma = "identity";
  std::vector<double> sim_levels{0.95};
  std::vector<int64_t> checkpoints;
  std::vector<double> theta0;
  bool baseline = false;
  std::string sim_out;
  AddModelOptions(sim, sim_family, sim_c, sim_tau, sim_mu, sim_gamma, sim_alpha,
                  sim_kappa1, sim_kappa2);
  sim->add_option("--p", sim_p, "covariates excluding the intercept")
      ->capture_default_str();
  sim->add_option("--n", sim_n, "stream length")->capture_default_str();
  sim->add_option("--sigma", sigma, "identity | ar")->capture_default_str();
  sim->add_option("--noise-sd", noise_sd, "response noise sd")
      ->capture_default_str();
  sim->add_option("--theta0", theta0, "true coefficients (default all ones)")
      ->delimiter(',');
  sim->add_option("--replications", replications)->capture_default_str();
  sim->add_option("--levels", sim_levels, "confidence levels")->delimiter(',');
  sim->add_option("--checkpoints", checkpoints, "stream lengths to report")
      ->delimiter(',');
  sim->add_flag("--baseline", baseline, "also run the noise-free pass");
  sim->add_option("--out", sim_out, "JSON Lines report path (default stdout)");
  sim->add_option("--rs-paths", rs_paths, "Monte Carlo paths for critical values")
      ->capture_default_str();
  sim->add_option("--rs-grid", rs_grid)->capture_default_str();
  sim->add_option("--critvals-cache", cv_cache, "critical value cache file");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Fit a CSV stream");
  ana->add_option("--config", config_path, "analysis file (key = value)");
  std::string ana_family = "huber";
  double ana_c = 1.345, ana_tau = 0.5, ana_gamma = 0.5, ana_alpha = 0.51;
  double ana_kappa1 = 1e-3, ana_kappa2 = 1e-3, ana_level = 0.95;
  std::string ana_mu = "1";
  std::string data_path, response, ana_out;
  bool standardize = true;
  std::vector<std::string> encodings;
  int trajectory_points = 20;
  AddModelOptions(ana, ana_family, ana_c, ana_tau, ana_mu, ana_gamma, ana_alpha,
                  ana_kappa1, ana_kappa2);
  ana->add_option("--data", data_path, "CSV file")->required();
  ana->add_option("--response", response, "response column")->required();
  ana->add_option("--standardize", standardize, "standardize every column")
      ->capture_default_str();
  ana->add_option("--encode", encodings, "column:label=code,... (repeatable)");
  ana->add_option("--level", ana_level)->capture_default_str();
  ana->add_option("--trajectory-points", trajectory_points)->capture_default_str();
  ana->add_option("--out", ana_out, "JSON Lines report path (default stdout)");
  ana->add_option("--rs-paths", rs_paths)->capture_default_str();
  ana->add_option("--rs-grid", rs_grid)->capture_default_str();
  ana->add_option("--critvals-cache", cv_cache, "critical value cache file");

  // critvals
  auto* cv = app.add_subcommand("critvals", "Random-scaling critical values");
  std::vector<double> cv_levels{0.5, 0.9, 0.95, 0.975, 0.995};
  std::string cv_out = "critvals.txt";
  cv->add_option("--levels", cv_levels, "quantile levels")->delimiter(',');
  cv->add_option("--paths", rs_paths)->capture_default_str();
  cv->add_option("--grid", rs_grid)->capture_default_str();
  cv->add_option("--out", cv_out, "cache file")->capture_default_str();

  std::vector<std::string> argv_store{"ldpsgd"};
  try {
    const std::vector<std::string> expanded = ExpandConfig(args);
    argv_store.insert(argv_store.end(), expanded.begin(), expanded.end());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    CriticalValueOptions cv_options;
    cv_options.paths = rs_paths;
    cv_options.grid = rs_grid;
    cv_options.seed = seed;
    cv_options.threads = threads;

    if (*sim) {
      SimDesign design;
      design.family = ParseFamily(sim_family);
      design.c = sim_c;
      design.tau = sim_tau;
      design.p = sim_p;
      design.n = sim_n;
      design.budget = ParseBudget(sim_mu);
      design.sigma = ParseCovariance(sigma);
      if (!theta0.empty()) {
        design.theta0 = Eigen::Map<Eigen::VectorXd>(
            theta0.data(), static_cast<Eigen::Index>(theta0.size()));
      }
      design.noise_sd = noise_sd;
      design.replications = replications;
      design.levels = sim_levels;
      design.checkpoints = checkpoints;
      design.schedule = {sim_gamma, sim_alpha};
      design.seed = seed;
      design.kappa1 = sim_kappa1;
      design.kappa2 = sim_kappa2;
      design.include_baseline = baseline;
      design.Validate();

      const auto start = std::chrono::steady_clock::now();
      const CriticalValueTable table =
          CachedCriticalValues(PivotLevels(design.levels), cv_options, cv_cache);
      const auto results = RunReplications(design, table, threads);
      SimulationReport report = Aggregate(results, design);
      report.wall_seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
      report.threads = ResolveThreadCount(threads);
      Emit(sim_out, SerializeSimulation(design, results, report), out);
      if (!sim_out.empty() && sim_out != "-") out << FormatSummary(report);
    } else if (*ana) {
      CsvOptions csv;
      csv.response = response;
      csv.standardize = standardize;
      for (const auto& e : encodings) csv.encodings.push_back(ParseEncoding(e));
      const Dataset data = LoadCsv(data_path, csv);

      AnalyzeOptions options;
      options.family = ParseFamily(ana_family);
      options.c = ana_c;
      options.tau = ana_tau;
      options.budget = ParseBudget(ana_mu);
      options.schedule = {ana_gamma, ana_alpha};
      options.kappa1 = ana_kappa1;
      options.kappa2 = ana_kappa2;
      options.level = ana_level;
      options.trajectory_points = trajectory_points;
      options.seed = seed;
      const CriticalValueTable table =
          CachedCriticalValues(PivotLevels({ana_level}), cv_options, cv_cache);
      Emit(ana_out, SerializeAnalysis(Analyze(data, options, table)), out);
    } else if (*cv) {
      bool hit = false;
      const CriticalValueTable table =
          CachedCriticalValues(cv_levels, cv_options, cv_out, &hit);
      out << (hit ? "# cache hit: " : "# computed: ") << cv_out << "\n";
      for (double l : cv_levels) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6g %.6f\n", l, table.At(l));
        out << buf;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ldpsgd
