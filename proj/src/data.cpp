// Copyright 2025 The dptopk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dptopk/data.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "dptopk/mechanisms.hpp"

namespace dptopk {

namespace {

double parse_score(const std::string& token, long line_no) {
  size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) +
                    ": cannot parse '" + token + "' as a number");
  }
  // Allow trailing whitespace only.
  for (size_t i = consumed; i < token.size(); ++i) {
    if (!std::isspace(static_cast<unsigned char>(token[i]))) {
      throw DataError("line " + std::to_string(line_no) +
                      ": trailing garbage after number in '" + token + "'");
    }
  }
  if (!std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) +
                    ": non-finite score");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

ScoreVector load_scores(const std::string& path, const std::string& format,
                        double delta_down, double delta_up) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::vector<double> values;
  std::string line;
  long line_no = 0;

  if (format == "lines") {
    while (std::getline(in, line)) {
      ++line_no;
      const std::string token = trim(line);
      if (token.empty()) continue;
      values.push_back(parse_score(token, line_no));
    }
  } else if (format.rfind("csv:", 0) == 0) {
    const std::string column = format.substr(4);
    if (column.empty()) throw DataError("csv format needs a column name");
    if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
    ++line_no;
    const std::vector<std::string> header = split_csv_line(line);
    int col = -1;
    for (size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == column) {
        col = static_cast<int>(i);
        break;
      }
    }
    if (col < 0) {
      throw DataError("column '" + column + "' not found in header of '" +
                      path + "'");
    }
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const std::vector<std::string> fields = split_csv_line(line);
      if (static_cast<size_t>(col) >= fields.size()) {
        throw DataError("line " + std::to_string(line_no) +
                        ": missing column '" + column + "'");
      }
      values.push_back(parse_score(trim(fields[static_cast<size_t>(col)]),
                                   line_no));
    }
  } else {
    throw DataError("unknown format '" + format +
                    "' (expected 'lines' or 'csv:<column>')");
  }

  if (values.empty()) throw DataError("no scores found in '" + path + "'");
  const double sensitivity = effective_sensitivity(delta_down, delta_up);
  for (double& v : values) v /= sensitivity;
  return ScoreVector(std::move(values));
}

ScoreVector gen_zipf(int d, double s, double scale) {
  if (d < 2) throw std::invalid_argument("gen_zipf: d must be >= 2");
  if (!(s >= 0.0)) throw std::invalid_argument("gen_zipf: s must be >= 0");
  if (!(scale > 0.0)) throw std::invalid_argument("gen_zipf: scale must be > 0");
  std::vector<double> freq(static_cast<size_t>(d));
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    freq[static_cast<size_t>(i)] =
        std::exp(-s * std::log(static_cast<double>(i + 1)));
    total += freq[static_cast<size_t>(i)];
  }
  for (double& f : freq) f = scale * (f / total);
  return ScoreVector(std::move(freq));
}

}  // namespace dptopk
