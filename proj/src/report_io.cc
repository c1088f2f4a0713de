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

#include "ldpsgd/report_io.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "ldpsgd/errors.h"

namespace ldpsgd {
namespace {

using nlohmann::json;

enum class Kind { kNumber, kInteger, kString, kBool, kArray };

const json& Field(const json& obj, const char* key, Kind kind) {
  if (!obj.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  const json& v = obj.at(key);
  bool ok = false;
  switch (kind) {
    case Kind::kNumber:
      ok = v.is_number();
      break;
    case Kind::kInteger:
      ok = v.is_number_integer();
      break;
    case Kind::kString:
      ok = v.is_string();
      break;
    case Kind::kBool:
      ok = v.is_boolean();
      break;
    case Kind::kArray:
      ok = v.is_array();
      break;
  }
  if (!ok) throw ParseError(std::string("field '") + key + "' has the wrong type");
  return v;
}

std::vector<double> NumberArray(const json& obj, const char* key) {
  std::vector<double> out;
  for (const json& v : Field(obj, key, Kind::kArray)) {
    if (!v.is_number()) {
      throw ParseError(std::string("field '") + key + "' must hold numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

json VectorJson(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd VectorFrom(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json BudgetJson(const PrivacyBudget& b) {
  if (b.infinite()) return "inf";
  if (!b.per_step().empty()) return b.per_step();
  return b.mu();
}

PrivacyBudget BudgetFrom(const json& v) {
  if (v.is_string() && v.get<std::string>() == "inf") return PrivacyBudget::Infinite();
  if (v.is_number()) return PrivacyBudget(v.get<double>());
  if (v.is_array()) return PrivacyBudget::PerStep(v.get<std::vector<double>>());
  throw ParseError("field 'mu' must be a number, a list or \"inf\"");
}

template <typename Fn>
void ForEachLine(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json obj = json::parse(line);
      if (!obj.is_object()) throw ParseError("record is not an object");
      fn(obj, Field(obj, "type", Kind::kString).get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError("report line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

json IntervalJson(const ConfidenceInterval& ci) { return {ci.lower, ci.upper}; }

ConfidenceInterval IntervalFrom(const json& obj, const char* key, double level,
                                IntervalMethod method) {
  const std::vector<double> v = NumberArray(obj, key);
  if (v.size() != 2 || v[0] > v[1]) {
    throw ParseError(std::string("field '") + key + "' must be [lower, upper]");
  }
  return {v[0], v[1], level, method};
}

}  // namespace

json DesignToJson(const SimDesign& d) {
  return {{"type", "design"},
          {"family", FamilyName(d.family)},
          {"c", d.c},
          {"tau", d.tau},
          {"p", d.p},
          {"n", d.n},
          {"mu", BudgetJson(d.budget)},
          {"sigma", CovarianceName(d.sigma)},
          {"theta0", VectorJson(d.Truth())},
          {"noise_sd", d.noise_sd},
          {"replications", d.replications},
          {"levels", d.levels},
          {"checkpoints", d.Checkpoints()},
          {"gamma", d.schedule.gamma},
          {"alpha", d.schedule.alpha},
          {"seed", d.seed},
          {"kappa1", d.kappa1},
          {"kappa2", d.kappa2},
          {"include_baseline", d.include_baseline}};
}

SimDesign DesignFromJson(const json& j) {
  SimDesign d;
  d.family = ParseFamily(Field(j, "family", Kind::kString).get<std::string>());
  d.c = Field(j, "c", Kind::kNumber).get<double>();
  d.tau = Field(j, "tau", Kind::kNumber).get<double>();
  d.p = Field(j, "p", Kind::kInteger).get<int>();
  d.n = Field(j, "n", Kind::kInteger).get<int64_t>();
  if (!j.contains("mu")) throw ParseError("missing field 'mu'");
  d.budget = BudgetFrom(j.at("mu"));
  d.sigma = ParseCovariance(Field(j, "sigma", Kind::kString).get<std::string>());
  d.theta0 = VectorFrom(NumberArray(j, "theta0"));
  d.noise_sd = Field(j, "noise_sd", Kind::kNumber).get<double>();
  d.replications = Field(j, "replications", Kind::kInteger).get<int>();
  d.levels = NumberArray(j, "levels");
  d.checkpoints = Field(j, "checkpoints", Kind::kArray).get<std::vector<int64_t>>();
  d.schedule.gamma = Field(j, "gamma", Kind::kNumber).get<double>();
  d.schedule.alpha = Field(j, "alpha", Kind::kNumber).get<double>();
  d.seed = Field(j, "seed", Kind::kInteger).get<uint64_t>();
  d.kappa1 = Field(j, "kappa1", Kind::kNumber).get<double>();
  d.kappa2 = Field(j, "kappa2", Kind::kNumber).get<double>();
  d.include_baseline = Field(j, "include_baseline", Kind::kBool).get<bool>();
  d.Validate();
  return d;
}

std::string SerializeSimulation(const SimDesign& design,
                                const std::vector<ReplicationResult>& results,
                                const SimulationReport& report) {
  std::string out = DesignToJson(design).dump() + "\n";
  for (const ReplicationResult& r : results) {
    for (const IntervalRecord& rec : r.records) {
      const json line = {{"type", "interval"},  {"replication", rec.replication},
                         {"n", rec.n},          {"method", rec.method},
                         {"level", rec.level},  {"coefficient", rec.coefficient},
                         {"estimate", rec.estimate}, {"lower", rec.lower},
                         {"upper", rec.upper},  {"truth", rec.truth},
                         {"covers", rec.covers()}};
      out += line.dump() + "\n";
    }
  }
  for (const SummaryRow& row : report.rows) {
    const json line = {{"type", "summary"},
                       {"method", row.method},
                       {"n", row.n},
                       {"level", row.level},
                       {"cp", row.cp},
                       {"cp_se", row.cp_se},
                       {"al", row.al},
                       {"al_se", row.al_se},
                       {"se_method", "sd across replication blocks"},
                       {"coefficient_cp", row.coefficient_cp},
                       {"coefficient_al", row.coefficient_al}};
    out += line.dump() + "\n";
  }
  const json meta = {{"type", "metadata"},
                     {"replications", report.replications},
                     {"blocks", report.blocks},
                     {"threads", report.threads},
                     {"wall_seconds", report.wall_seconds}};
  out += meta.dump() + "\n";
  return out;
}

ParsedSimulation ParseSimulation(const std::string& text) {
  ParsedSimulation parsed;
  bool have_design = false;
  bool have_meta = false;
  ForEachLine(text, [&](const json& obj, const std::string& type) {
    if (type == "design") {
      if (have_design) throw ParseError("duplicate design record");
      parsed.design = DesignFromJson(obj);
      have_design = true;
    } else if (type == "interval") {
      IntervalRecord rec;
      rec.replication = Field(obj, "replication", Kind::kInteger).get<int>();
      rec.n = Field(obj, "n", Kind::kInteger).get<int64_t>();
      rec.method = Field(obj, "method", Kind::kString).get<std::string>();
      rec.level = Field(obj, "level", Kind::kNumber).get<double>();
      rec.coefficient = Field(obj, "coefficient", Kind::kInteger).get<int>();
      rec.estimate = Field(obj, "estimate", Kind::kNumber).get<double>();
      rec.lower = Field(obj, "lower", Kind::kNumber).get<double>();
      rec.upper = Field(obj, "upper", Kind::kNumber).get<double>();
      rec.truth = Field(obj, "truth", Kind::kNumber).get<double>();
      if (Field(obj, "covers", Kind::kBool).get<bool>() != rec.covers()) {
        throw ParseError("interval 'covers' flag disagrees with its bounds");
      }
      if (rec.lower > rec.upper) throw ParseError("interval bounds out of order");
      parsed.records.push_back(rec);
    } else if (type == "summary") {
      SummaryRow row;
      row.method = Field(obj, "method", Kind::kString).get<std::string>();
      row.n = Field(obj, "n", Kind::kInteger).get<int64_t>();
      row.level = Field(obj, "level", Kind::kNumber).get<double>();
      row.cp = Field(obj, "cp", Kind::kNumber).get<double>();
      row.cp_se = Field(obj, "cp_se", Kind::kNumber).get<double>();
      row.al = Field(obj, "al", Kind::kNumber).get<double>();
      row.al_se = Field(obj, "al_se", Kind::kNumber).get<double>();
      row.coefficient_cp = NumberArray(obj, "coefficient_cp");
      row.coefficient_al = NumberArray(obj, "coefficient_al");
      if (row.cp < 0.0 || row.cp > 1.0 || row.al < 0.0 || row.cp_se < 0.0 ||
          row.al_se < 0.0) {
        throw ParseError("summary values out of range");
      }
      parsed.report.rows.push_back(std::move(row));
    } else if (type == "metadata") {
      parsed.report.replications = Field(obj, "replications", Kind::kInteger).get<int>();
      parsed.report.blocks = Field(obj, "blocks", Kind::kInteger).get<int>();
      parsed.report.threads = Field(obj, "threads", Kind::kInteger).get<int>();
      parsed.report.wall_seconds = Field(obj, "wall_seconds", Kind::kNumber).get<double>();
      have_meta = true;
    } else {
      throw ParseError("unknown record type '" + type + "'");
    }
  });
  if (!have_design) throw ParseError("simulation report lacks a design record");
  if (!have_meta) throw ParseError("simulation report lacks a metadata record");
  return parsed;
}

std::string SerializeAnalysis(const AnalysisReport& report) {
  const TrajectoryPoint& last = report.final_point();
  std::string out;
  const json fit = {{"type", "fit"},
                    {"columns", report.columns},
                    {"response", report.response},
                    {"family", report.family},
                    {"n", report.n},
                    {"level", report.level},
                    {"private", report.is_private},
                    {"mu", report.is_private ? json(report.mu) : json("inf")},
                    {"plugin_release_budget",
                     report.is_private ? json(report.plugin_release_budget)
                                       : json("inf")},
                    {"plugin_releases", report.plugin_releases},
                    {"theta_bar", VectorJson(last.theta_bar)},
                    {"ols", VectorJson(report.ols)}};
  out += fit.dump() + "\n";
  for (size_t j = 0; j < report.columns.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const json line = {{"type", "coefficient"},
                       {"name", report.columns[j]},
                       {"index", j},
                       {"estimate", last.theta_bar[jj]},
                       {"ols", report.ols[jj]},
                       {"plugin", IntervalJson(last.plugin[j])},
                       {"random_scaling", IntervalJson(last.random_scaling[j])}};
    out += line.dump() + "\n";
  }
  for (const TrajectoryPoint& pt : report.trajectory) {
    for (size_t j = 0; j < report.columns.size(); ++j) {
      const json line = {{"type", "checkpoint"},
                         {"n", pt.n},
                         {"index", j},
                         {"name", report.columns[j]},
                         {"estimate", pt.theta_bar[static_cast<Eigen::Index>(j)]},
                         {"plugin", IntervalJson(pt.plugin[j])},
                         {"random_scaling", IntervalJson(pt.random_scaling[j])}};
      out += line.dump() + "\n";
    }
  }
  return out;
}

AnalysisReport ParseAnalysis(const std::string& text) {
  AnalysisReport report;
  bool have_fit = false;
  ForEachLine(text, [&](const json& obj, const std::string& type) {
    if (type == "fit") {
      report.columns = Field(obj, "columns", Kind::kArray).get<std::vector<std::string>>();
      report.response = Field(obj, "response", Kind::kString).get<std::string>();
      report.family = Field(obj, "family", Kind::kString).get<std::string>();
      report.n = Field(obj, "n", Kind::kInteger).get<int64_t>();
      report.level = Field(obj, "level", Kind::kNumber).get<double>();
      report.is_private = Field(obj, "private", Kind::kBool).get<bool>();
      if (report.is_private) {
        report.mu = Field(obj, "mu", Kind::kNumber).get<double>();
        report.plugin_release_budget =
            Field(obj, "plugin_release_budget", Kind::kNumber).get<double>();
      }
      report.plugin_releases = Field(obj, "plugin_releases", Kind::kInteger).get<int>();
      report.ols = VectorFrom(NumberArray(obj, "ols"));
      have_fit = true;
    } else if (type == "coefficient") {
      if (!have_fit) throw ParseError("coefficient before fit record");
      const auto j = Field(obj, "index", Kind::kInteger).get<size_t>();
      if (j >= report.columns.size() ||
          Field(obj, "name", Kind::kString).get<std::string>() != report.columns[j]) {
        throw ParseError("coefficient record does not match the fit columns");
      }
      Field(obj, "estimate", Kind::kNumber);
      Field(obj, "ols", Kind::kNumber);
      IntervalFrom(obj, "plugin", report.level, IntervalMethod::kPluginPrivate);
      IntervalFrom(obj, "random_scaling", report.level, IntervalMethod::kRandomScaling);
    } else if (type == "checkpoint") {
      if (!have_fit) throw ParseError("checkpoint before fit record");
      const int64_t n = Field(obj, "n", Kind::kInteger).get<int64_t>();
      const auto j = Field(obj, "index", Kind::kInteger).get<size_t>();
      if (j >= report.columns.size()) throw ParseError("coefficient index out of range");
      if (report.trajectory.empty() || report.trajectory.back().n != n) {
        TrajectoryPoint pt;
        pt.n = n;
        pt.theta_bar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(report.columns.size()));
        report.trajectory.push_back(std::move(pt));
      }
      TrajectoryPoint& pt = report.trajectory.back();
      if (j != pt.plugin.size()) throw ParseError("checkpoint coefficients out of order");
      pt.theta_bar[static_cast<Eigen::Index>(j)] =
          Field(obj, "estimate", Kind::kNumber).get<double>();
      pt.plugin.push_back(IntervalFrom(obj, "plugin", report.level,
                                       report.is_private
                                           ? IntervalMethod::kPluginPrivate
                                           : IntervalMethod::kPluginNonPrivate));
      pt.random_scaling.push_back(IntervalFrom(obj, "random_scaling", report.level,
                                               IntervalMethod::kRandomScaling));
    } else {
      throw ParseError("unknown record type '" + type + "'");
    }
  });
  if (!have_fit) throw ParseError("analysis report lacks a fit record");
  if (report.trajectory.empty()) throw ParseError("analysis report has no checkpoints");
  return report;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileAtomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path + "'");
  }
}

}  // namespace ldpsgd
