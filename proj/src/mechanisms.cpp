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

#include "dptopk/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dptopk {

namespace {

struct NoisyScore {
  double value;
  int index;
  // "beats" order: larger noisy value wins, ties go to the smaller index.
  bool operator<(const NoisyScore& other) const {
    if (value != other.value) return value < other.value;
    return index > other.index;
  }
};

struct WeakestFirst {
  bool operator()(const NoisyScore& a, const NoisyScore& b) const {
    return b < a;
  }
};

void validate_select_params(const ScoreVector& scores,
                            const MechanismParams& params) {
  if (params.kappa < 1 || params.kappa > scores.dimension()) {
    throw std::invalid_argument("lipschitz_select: kappa must lie in [1, d]");
  }
  if (!(params.epsilon > 0.0)) {
    throw std::invalid_argument("lipschitz_select: epsilon must be positive");
  }
  if (!(params.delta_loss > 0.0)) {
    throw std::invalid_argument(
        "lipschitz_select: delta_loss must be positive");
  }
}

}  // namespace

std::vector<int> lipschitz_select(const ScoreVector& scores,
                                  const MechanismParams& params, Rng& rng) {
  validate_select_params(scores, params);
  const int d = scores.dimension();
  const int kappa = params.kappa;
  const double coef =
      params.epsilon / (2.0 * kappa * params.delta_loss);
  const std::vector<double>& raw = scores.raw();

  // Size-kappa min-heap of the current winners; heap top is the weakest.
  std::vector<NoisyScore> heap;
  heap.reserve(static_cast<size_t>(kappa));
  WeakestFirst weakest_first;
  for (int i = 0; i < d; ++i) {
    const double z =
        coef * raw[static_cast<size_t>(i)] +
        inv_cdf(params.noise, rng.uniform_open());
    const NoisyScore cand{z, i};
    if (static_cast<int>(heap.size()) < kappa) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), weakest_first);
    } else if (heap.front() < cand) {
      std::pop_heap(heap.begin(), heap.end(), weakest_first);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), weakest_first);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), weakest_first);
  std::vector<int> out;
  out.reserve(heap.size());
  for (const NoisyScore& w : heap) out.push_back(w.index);
  return out;
}

std::vector<int> peel(const ScoreVector& scores, int k, double epsilon,
                      double delta_loss, NoiseKind noise, Rng& rng) {
  const int d = scores.dimension();
  if (k < 1 || k > d) {
    throw std::invalid_argument("peel: k must lie in [1, d]");
  }
  if (!(epsilon > 0.0) || !(delta_loss > 0.0)) {
    throw std::invalid_argument("peel: epsilon and delta_loss must be positive");
  }
  const double coef = (epsilon / k) / (2.0 * delta_loss);
  const std::vector<double>& raw = scores.raw();

  std::vector<int> remaining(static_cast<size_t>(d));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> out;
  out.reserve(static_cast<size_t>(k));

  // Rounds use substreams of a key drawn from the caller's stream:
  // reproducible given the seed, independent of any trial scheduling, and
  // distinct across consecutive calls on the same stream.
  const uint64_t round_base = rng.next_u64();
  for (int round = 0; round < k; ++round) {
    Rng round_rng(mix_seed(round_base, static_cast<uint64_t>(round)));
    NoisyScore best{-std::numeric_limits<double>::infinity(), d};
    size_t best_pos = 0;
    for (size_t pos = 0; pos < remaining.size(); ++pos) {
      const int i = remaining[pos];
      const double z = coef * raw[static_cast<size_t>(i)] +
                       inv_cdf(noise, round_rng.uniform_open());
      if (best < NoisyScore{z, i}) {
        best = NoisyScore{z, i};
        best_pos = pos;
      }
    }
    out.push_back(best.index);
    remaining.erase(remaining.begin() + static_cast<long>(best_pos));
  }
  return out;
}

std::vector<int> oneshot(const ScoreVector& scores, int k, double epsilon,
                         double delta_loss, NoiseKind noise, Rng& rng) {
  MechanismParams params;
  params.epsilon = epsilon;
  params.delta_loss = delta_loss;
  params.kappa = k;
  params.noise = noise;
  return lipschitz_select(scores, params, rng);
}

int permute_and_flip_ref(const ScoreVector& scores, double epsilon,
                         double delta_loss, Rng& rng) {
  if (!(epsilon > 0.0) || !(delta_loss > 0.0)) {
    throw std::invalid_argument(
        "permute_and_flip_ref: epsilon and delta_loss must be positive");
  }
  const int d = scores.dimension();
  const std::vector<double>& raw = scores.raw();
  const double coef = epsilon / (2.0 * delta_loss);
  double q_max = -std::numeric_limits<double>::infinity();
  for (double v : raw) q_max = std::max(q_max, coef * v);

  std::vector<int> perm(static_cast<size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = d - 1; i > 0; --i) {
    std::swap(perm[static_cast<size_t>(i)],
              perm[static_cast<size_t>(rng.uniform_int(i + 1))]);
  }
  // The argmax item is accepted with probability 1, so this terminates.
  for (int idx : perm) {
    const double accept = coef * raw[static_cast<size_t>(idx)] - q_max;
    if (std::log(rng.uniform_open()) < accept) return idx;
  }
  return perm.back();
}

double effective_sensitivity(double delta_down, double delta_up) {
  if (delta_down < 0.0 || delta_up < 0.0) {
    throw std::invalid_argument(
        "effective_sensitivity: deltas must be nonnegative");
  }
  if (delta_down == 0.0 && delta_up == 0.0) {
    throw std::invalid_argument(
        "effective_sensitivity: degenerate scoring function (both deltas 0)");
  }
  return 0.5 * (delta_down + delta_up);
}

}  // namespace dptopk
