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

#include "dptopk/score_vector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dptopk {

ScoreVector::ScoreVector(std::vector<double> raw) : raw_(std::move(raw)) {
  if (raw_.empty()) {
    throw std::invalid_argument("ScoreVector: scores must be nonempty");
  }
  for (double v : raw_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("ScoreVector: scores must be finite");
    }
  }
  const size_t d = raw_.size();
  rank_to_index_.resize(d);
  std::iota(rank_to_index_.begin(), rank_to_index_.end(), 0);
  // stable_sort keeps equal scores in ascending index order.
  std::stable_sort(rank_to_index_.begin(), rank_to_index_.end(),
                   [&](int a, int b) { return raw_[static_cast<size_t>(a)] >
                                              raw_[static_cast<size_t>(b)]; });
  sorted_.resize(d);
  index_to_rank_.resize(d);
  for (size_t r = 0; r < d; ++r) {
    sorted_[r] = raw_[static_cast<size_t>(rank_to_index_[r])];
    index_to_rank_[static_cast<size_t>(rank_to_index_[r])] =
        static_cast<int>(r);
  }
}

ScoreVector ScoreVector::shifted(double constant) const {
  std::vector<double> moved = raw_;
  for (double& v : moved) v += constant;
  return ScoreVector(std::move(moved));
}

}  // namespace dptopk
