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

#ifndef DPTOPK_ANALYSIS_HPP_
#define DPTOPK_ANALYSIS_HPP_

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dptopk/canonical.hpp"
#include "dptopk/score_vector.hpp"

namespace dptopk {

// Utility predicates over (h, t). The top class counts as having the full
// top-k prefix, so TOP implies GREAT implies GOOD for every k.
struct Predicate {
  enum class Variant { Top, Great, Good };
  Variant variant;
  int k;

  bool matches(int h, int t) const;
  std::string name() const;

  static Predicate top(int k) { return {Variant::Top, k}; }
  static Predicate great(int k) { return {Variant::Great, k}; }
  static Predicate good(int k) { return {Variant::Good, k}; }
};

// (h, t) of a k-subset: h is the longest fully-present rank prefix (capped
// by the t = k convention for the exact top-k), t the worst present rank.
UtilityClass classify_subset(const std::vector<int>& subset,
                             const ScoreVector& scores);

// Exhaustive distribution over all C(d, k) subsets, the ground truth the
// fast exact path is checked against. Refuses domains above the cap.
struct BruteForceDistribution {
  std::vector<std::vector<int>> subsets;  // ascending item indices
  std::vector<double> log_prob;           // aligned with subsets
  std::map<std::pair<int, int>, double> class_log_prob;
};

inline constexpr long kBruteForceSubsetCap = 1'000'000;

BruteForceDistribution brute_force_distribution(const ScoreVector& scores,
                                                int k, double epsilon,
                                                double gamma);

// Canonical loss straight from its definition: half the gap between the
// best missing and the worst present score, with the constructive witness
// verified (shifting the subset up and the rest down by the loss must
// make the subset optimal). The witness failing is an internal error.
double canonical_loss_oracle(const std::vector<int>& subset,
                             const ScoreVector& scores);

// max over positions of (x_(l) - y_(l)) / 2, the loss of the joint
// exponential mechanism; implemented only as a comparison point.
double joint_loss(const std::vector<int>& subset, const ScoreVector& scores);

// Probability mass of a predicate under an exact class distribution.
double predicate_probability(const ClassDistribution& dist,
                             const Predicate& pred);

struct McEstimate {
  double p_hat;
  double std_err;
};

using SubsetMechanism = std::function<std::vector<int>(Rng&)>;

// Runs the mechanism `trials` times with per-trial substreams, classifies
// each output and returns the predicate frequency with its binomial
// standard error. Trials may fan out across threads; per-trial streams
// and integer count reduction keep the result identical either way.
McEstimate mc_estimate(const SubsetMechanism& mechanism,
                       const ScoreVector& scores, const Predicate& pred,
                       long trials, Rng& rng, int threads = 1);

struct BoundInputs {
  int d;
  int k;
  double alpha;       // failure rate, in (0, 0.1]
  double epsilon;
  double gamma;       // in (0, 1]
  double delta_loss;
};

enum class BoundKind { Canonical, Peeling };

// log c_{d,k} = log C(d,k) - k log(d/k); lies in (0, k].
double log_c_dk(int d, int k);

// Additive utility-loss threshold below x_(k): with probability at least
// 1 - alpha the selected tail satisfies x_(T) > x_(k) - threshold.
// Canonical: (2*delta/(gamma*eps)) * (k log(d/k) + log(1/alpha) + C) with
// C = log c_{d,k} in exact mode or its upper bound k otherwise.
// Peeling: (2*delta/eps) * (k log(dk) + k log(1/alpha) - 0.06 k).
double utility_bound(const BoundInputs& inputs, BoundKind which,
                     bool exact_log_c = true);

struct LeapExpectations {
  double canonical;  // E[X]  = (1/gamma)(k log(d/k) + log c_{d,k})
  double peeling;    // E[X'] = k log((d-1-k) k)
};

LeapExpectations leap_expectations(int d, int k, double gamma);

// Exact DP audit of the canonical mechanism (Gumbel instantiation): for
// n_random perturbations with ||delta||_inf <= 1 plus four deterministic
// extreme patterns, compares per-subset log probabilities between the
// original and perturbed scores and returns the largest absolute
// difference. Must stay below epsilon for an epsilon-DP mechanism.
double dp_audit_exact(const ScoreVector& scores, int k, double epsilon,
                      double gamma, int n_random, Rng& rng);

// Enumerates all k-subsets of {0..d-1} in lexicographic order.
void for_each_subset(int d, int k,
                     const std::function<void(const std::vector<int>&)>& fn);

}  // namespace dptopk

#endif  // DPTOPK_ANALYSIS_HPP_
