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

#ifndef LDPSGD_DATASET_H_
#define LDPSGD_DATASET_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ldpsgd {

// Ordinal codes for one categorical column, e.g. "smoker:No=0,Yes=1".
struct CategoricalEncoding {
  std::string column;
  std::map<std::string, double> codes;
};

// Parses "column:label=code,label=code,...". Throws ParseError.
CategoricalEncoding ParseEncoding(const std::string& spec);

struct CsvOptions {
  std::string response;
  bool standardize = true;
  std::vector<CategoricalEncoding> encodings;
};

// Design matrix with a leading intercept column. Rows keep file order, which
// is also the streaming order.
struct Dataset {
  std::vector<std::string> columns;  // "(intercept)" then covariate names
  std::string response;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  bool standardized = false;
  // Per raw column (covariates, then response) when standardized.
  std::vector<double> means;
  std::vector<double> sds;

  int64_t rows() const { return x.rows(); }
};

// Comma-delimited, header row required. Numeric cells are parsed as doubles;
// columns with an encoding are mapped through it. With `standardize`, every
// column including the response is centered and scaled by its sample sd.
// Errors (missing value, non-numeric cell, unknown category, absent response,
// zero variance column) are ParseErrors naming the row and column.
Dataset LoadCsv(const std::string& path, const CsvOptions& options);
Dataset ParseCsv(const std::string& text, const CsvOptions& options);

// Writes covariates (without the intercept) and the response as CSV with
// round-trip precision.
std::string FormatCsv(const Dataset& data);

// Offline least-squares fit on the encoded matrix.
Eigen::VectorXd LeastSquares(const Dataset& data);

}  // namespace ldpsgd

#endif  // LDPSGD_DATASET_H_
