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

#ifndef LDPSGD_REPORT_IO_H_
#define LDPSGD_REPORT_IO_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "ldpsgd/analyze.h"
#include "ldpsgd/sim_harness.h"

namespace ldpsgd {

// Reports are JSON Lines. Every line is an object with a "type" field:
//
//   simulation: one "design", one "interval" per replication / checkpoint /
//               method / level / coefficient, one "summary" per cell and a
//               closing "metadata" line.
//   analysis:   one "fit", one "coefficient" per coefficient and one
//               "checkpoint" per trajectory point and coefficient.

nlohmann::json DesignToJson(const SimDesign& design);
SimDesign DesignFromJson(const nlohmann::json& j);

std::string SerializeSimulation(const SimDesign& design,
                                const std::vector<ReplicationResult>& results,
                                const SimulationReport& report);

struct ParsedSimulation {
  SimDesign design;
  std::vector<IntervalRecord> records;
  SimulationReport report;
};

// Validates every line against the schema. Throws ParseError with the
// offending line number.
ParsedSimulation ParseSimulation(const std::string& text);

std::string SerializeAnalysis(const AnalysisReport& report);
AnalysisReport ParseAnalysis(const std::string& text);

std::string ReadFile(const std::string& path);
// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file.
void WriteFileAtomically(const std::string& path, const std::string& content);

}  // namespace ldpsgd

#endif  // LDPSGD_REPORT_IO_H_
