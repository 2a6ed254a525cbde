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

#ifndef DPTOPK_MECHANISMS_HPP_
#define DPTOPK_MECHANISMS_HPP_

#include <vector>

#include "dptopk/noise.hpp"
#include "dptopk/rng.hpp"
#include "dptopk/score_vector.hpp"

namespace dptopk {

// Parameters of one additive-noise selection: privacy loss epsilon, score
// sensitivity delta_loss (1 for pre-normalized scores), number of reported
// items kappa, and the noise distribution.
struct MechanismParams {
  double epsilon = 1.0;
  double delta_loss = 1.0;
  int kappa = 1;
  NoiseKind noise = NoiseKind::Gumbel;
};

// Adds noise Z_i = eps/(2*kappa*delta) * x_i + Q(U_i) to every score and
// reports the kappa items with the largest noisy value, in descending
// noisy-score order. Noisy-score ties break toward the smaller item index
// (a probability-zero event for continuous noise; determinism aids
// testing). One pass, O(d log kappa).
std::vector<int> lipschitz_select(const ScoreVector& scores,
                                  const MechanismParams& params, Rng& rng);

// k sequential single-item selections at privacy loss epsilon/k each,
// removing the winner after each round. Output in selection order. Each
// round uses a fresh substream derived from the caller's stream, so the
// result only depends on (scores, parameters, seed).
std::vector<int> peel(const ScoreVector& scores, int k, double epsilon,
                      double delta_loss, NoiseKind noise, Rng& rng);

// One noisy pass reporting the kappa = k largest noisy scores; the k in
// the exponent's denominator performs the internal budget split.
std::vector<int> oneshot(const ScoreVector& scores, int k, double epsilon,
                         double delta_loss, NoiseKind noise, Rng& rng);

// Literal rejection-based permute-and-flip: walk the items in a uniformly
// random order and accept item y with probability exp(q_y - q_max), where
// q_y = eps/(2*delta) * x_y. Serves as a distributional reference for
// single-item selection with Exponential noise.
int permute_and_flip_ref(const ScoreVector& scores, double epsilon,
                         double delta_loss, Rng& rng);

// Symmetric sensitivity (delta_down + delta_up)/2 for a scoring function
// whose per-user change is bounded below by -delta_down and above by
// +delta_up. The constant shift term of the underlying trick is dropped:
// shift-invariant mechanisms cannot see it.
double effective_sensitivity(double delta_down, double delta_up);

}  // namespace dptopk

#endif  // DPTOPK_MECHANISMS_HPP_
