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

#ifndef DPTOPK_DATA_HPP_
#define DPTOPK_DATA_HPP_

#include <stdexcept>
#include <string>

#include "dptopk/score_vector.hpp"

namespace dptopk {

// Malformed or unusable input data; the CLI maps this to exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads scores from a file and normalizes them by the effective
// sensitivity (delta_down + delta_up)/2. Formats:
//   "lines"     one score per line (blank lines ignored)
//   "csv:NAME"  the column NAME of a comma-separated file with a header
// Parse failures name the offending line.
ScoreVector load_scores(const std::string& path, const std::string& format,
                        double delta_down = 1.0, double delta_up = 1.0);

// Zipf-law scores: f(i) proportional to i^(-s), normalized to sum 1, then
// multiplied by `scale` (total mass). s = 0 gives uniform scores.
ScoreVector gen_zipf(int d, double s, double scale = 1.5e8);

}  // namespace dptopk

#endif  // DPTOPK_DATA_HPP_
