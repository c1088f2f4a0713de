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

#ifndef LDPSGD_CLI_H_
#define LDPSGD_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "ldpsgd/inference.h"
#include "ldpsgd/privacy.h"

namespace ldpsgd {

// Entry point of the `ldpsgd` tool. `args` excludes the program name.
// Returns the process exit status: 0 on success, nonzero exactly when an
// error was reported on `err`.
//
//   ldpsgd [--seed S] [--threads T] simulate --config <file> [--out <path>]
//   ldpsgd [--seed S] analyze --config <file> --data <csv> [--out <path>]
//   ldpsgd [--seed S] critvals --levels 0.5,0.975 --paths N --grid G [--out <path>]
//
// Config files hold `key = value` lines using the long option names of the
// subcommand; command-line flags override file values and unknown keys are
// rejected before any computation.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// "inf" (or "infinite", "none") is the noise-off sentinel; anything else
// must parse as a positive number.
PrivacyBudget ParseBudget(const std::string& text);

// Reads `cache_path` when it was produced with the same paths, grid and seed
// and covers every requested level; otherwise simulates and rewrites it.
// An empty path disables caching. `cache_hit` reports which case happened.
CriticalValueTable CachedCriticalValues(const std::vector<double>& levels,
                                        const CriticalValueOptions& options,
                                        const std::string& cache_path,
                                        bool* cache_hit = nullptr);

}  // namespace ldpsgd

#endif  // LDPSGD_CLI_H_
