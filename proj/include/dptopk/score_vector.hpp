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

#ifndef DPTOPK_SCORE_VECTOR_HPP_
#define DPTOPK_SCORE_VECTOR_HPP_

#include <vector>

namespace dptopk {

// Scores of d items, normalized so a single user changes each component by
// at most 1, together with the descending rank permutation. Ranks are
// 0-based internally: sorted()[r] is the (r+1)-th largest score. Ties are
// ranked by ascending item index, which makes the permutation (and every
// mechanism built on it) deterministic.
class ScoreVector {
 public:
  ScoreVector() = default;
  explicit ScoreVector(std::vector<double> raw);

  int dimension() const { return static_cast<int>(raw_.size()); }

  const std::vector<double>& raw() const { return raw_; }
  // Non-increasing order statistics.
  const std::vector<double>& sorted() const { return sorted_; }
  // rank (0-based) -> item index (0-based).
  const std::vector<int>& rank_to_index() const { return rank_to_index_; }
  // item index (0-based) -> rank (0-based).
  const std::vector<int>& index_to_rank() const { return index_to_rank_; }

  // Order statistic x_(r) by the usual 1-based rank convention.
  double order_stat(int rank_one_based) const {
    return sorted_[static_cast<size_t>(rank_one_based - 1)];
  }

  // Same scores translated by a constant; mechanisms must be insensitive
  // to this (shift invariance).
  ScoreVector shifted(double constant) const;

 private:
  std::vector<double> raw_;
  std::vector<double> sorted_;
  std::vector<int> rank_to_index_;
  std::vector<int> index_to_rank_;
};

}  // namespace dptopk

#endif  // DPTOPK_SCORE_VECTOR_HPP_
