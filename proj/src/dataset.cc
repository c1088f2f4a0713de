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

#include "ldpsgd/dataset.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ldpsgd/errors.h"

namespace ldpsgd {
namespace {

std::vector<std::string> SplitCsvLine(const std::string& line, int64_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) {
    throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string Where(int64_t line_no, const std::string& column) {
  return "row " + std::to_string(line_no) + ", column '" + column + "'";
}

}  // namespace

CategoricalEncoding ParseEncoding(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon == 0) {
    throw ParseError("encoding '" + spec + "' must look like column:label=code,...");
  }
  CategoricalEncoding enc;
  enc.column = spec.substr(0, colon);
  std::stringstream rest(spec.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.rfind('=');
    if (eq == std::string::npos) {
      throw ParseError("encoding item '" + item + "' lacks '='");
    }
    const std::string code = Trim(item.substr(eq + 1));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(code.data(), code.data() + code.size(), value);
    if (ec != std::errc() || ptr != code.data() + code.size()) {
      throw ParseError("encoding item '" + item + "' has a non-numeric code");
    }
    enc.codes[Trim(item.substr(0, eq))] = value;
  }
  if (enc.codes.empty()) throw ParseError("encoding '" + spec + "' has no labels");
  return enc;
}

Dataset ParseCsv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  int64_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    header = SplitCsvLine(line, line_no);
    for (auto& h : header) h = Trim(h);
  }
  if (header.empty()) throw ParseError("CSV input has no header row");

  const size_t ncol = header.size();
  int response_idx = -1;
  for (size_t c = 0; c < ncol; ++c) {
    if (header[c] == options.response) response_idx = static_cast<int>(c);
  }
  if (response_idx < 0) {
    throw ParseError("response column '" + options.response + "' not in header");
  }
  std::vector<const CategoricalEncoding*> enc(ncol, nullptr);
  for (const auto& e : options.encodings) {
    bool found = false;
    for (size_t c = 0; c < ncol; ++c) {
      if (header[c] == e.column) {
        enc[c] = &e;
        found = true;
      }
    }
    if (!found) throw ParseError("encoded column '" + e.column + "' not in header");
  }

  std::vector<std::vector<double>> cols(ncol);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const std::vector<std::string> fields = SplitCsvLine(line, line_no);
    if (fields.size() != ncol) {
      throw ParseError("row " + std::to_string(line_no) + ": expected " +
                       std::to_string(ncol) + " fields, found " +
                       std::to_string(fields.size()));
    }
    for (size_t c = 0; c < ncol; ++c) {
      const std::string cell = Trim(fields[c]);
      if (cell.empty() || cell == "NA" || cell == "NaN") {
        throw ParseError("missing value at " + Where(line_no, header[c]));
      }
      double value = 0.0;
      if (enc[c] != nullptr) {
        const auto it = enc[c]->codes.find(cell);
        if (it == enc[c]->codes.end()) {
          throw ParseError("unknown category '" + cell + "' at " +
                           Where(line_no, header[c]));
        }
        value = it->second;
      } else {
        const auto [ptr, ec] =
            std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc() || ptr != cell.data() + cell.size() ||
            !std::isfinite(value)) {
          throw ParseError("non-numeric value '" + cell + "' at " +
                           Where(line_no, header[c]));
        }
      }
      cols[c].push_back(value);
    }
  }
  const auto rows = static_cast<Eigen::Index>(cols[0].size());
  if (rows == 0) throw ParseError("CSV input has no data rows");

  Dataset data;
  data.response = options.response;
  data.standardized = options.standardize;
  data.columns.push_back("(intercept)");
  std::vector<size_t> order;
  for (size_t c = 0; c < ncol; ++c) {
    if (static_cast<int>(c) == response_idx) continue;
    order.push_back(c);
    data.columns.push_back(header[c]);
  }
  order.push_back(static_cast<size_t>(response_idx));

  Eigen::MatrixXd raw(rows, static_cast<Eigen::Index>(order.size()));
  for (size_t k = 0; k < order.size(); ++k) {
    raw.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(cols[order[k]].data(), rows);
  }
  if (options.standardize) {
    if (rows < 2) throw ParseError("standardization needs at least two rows");
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      const double mean = raw.col(k).mean();
      const double sd = std::sqrt((raw.col(k).array() - mean).square().sum() /
                                  static_cast<double>(rows - 1));
      if (!(sd > 0.0)) {
        throw ParseError("zero variance column '" + header[order[static_cast<size_t>(k)]] +
                         "'");
      }
      raw.col(k) = (raw.col(k).array() - mean) / sd;
      data.means.push_back(mean);
      data.sds.push_back(sd);
    }
  }
  const Eigen::Index k_cov = raw.cols() - 1;
  data.x.resize(rows, k_cov + 1);
  data.x.col(0).setOnes();
  data.x.rightCols(k_cov) = raw.leftCols(k_cov);
  data.y = raw.col(k_cov);
  return data;
}

Dataset LoadCsv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open CSV file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return ParseCsv(buf.str(), options);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string FormatCsv(const Dataset& data) {
  std::string out;
  for (size_t c = 1; c < data.columns.size(); ++c) out += data.columns[c] + ",";
  out += data.response + "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index c = 1; c < data.x.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g,", data.x(i, c));
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g\n", data.y[i]);
    out += buf;
  }
  return out;
}

Eigen::VectorXd LeastSquares(const Dataset& data) {
  return data.x.colPivHouseholderQr().solve(data.y);
}

}  // namespace ldpsgd
