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

#ifndef DPTOPK_CANONICAL_HPP_
#define DPTOPK_CANONICAL_HPP_

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "dptopk/noise.hpp"
#include "dptopk/rng.hpp"
#include "dptopk/score_vector.hpp"

namespace dptopk {

// A utility class (h, t): all k-subsets that contain the full top-h, miss
// rank h+1, and whose worst member has rank t. Ranks are 1-based here,
// matching the order-statistic convention. t = k only together with
// h = k-1 (the exact top-k, a singleton class).
struct UtilityClass {
  int h;
  int t;
  double log_size;
};

// Natural log of the binomial coefficient C(n, r); exact integer
// arithmetic for small n, log-gamma beyond.
double log_binomial(long n, long r);

// log |C_{h,t}|: 0 for (k-1, k), log C(t-h-2, k-1-h) for t > k.
double log_class_size(int h, int t, int k);

// log of the number of k-subsets sharing the loss value x_(t) when only
// the tail matters: log C(t-1, k-1).
double log_class_size_sum(int t, int k);

// (1-gamma) * x_(h+1) - gamma * x_(t). For the top class both order
// statistics are x_(k).
double class_loss(int h, int t, double gamma, const ScoreVector& scores);

// Visits every class with t in [k+1, d], h descending from k-1 to 0, with
// the incrementally maintained log class size. This single sweep backs
// both sampling and exact probabilities; the recurrence is
// C(n+1, r+1) = C(n, r) * (n+1)/(r+1) applied as h decreases.
// The visitor is called as f(h, t, log_size). Compensated summation keeps
// the accumulated logs faithful over long sweeps.
template <typename F>
void for_each_class_log_size(int d, int k, F&& f) {
  std::vector<double> log_int(static_cast<size_t>(d) + 1, 0.0);
  for (int i = 2; i <= d; ++i) log_int[static_cast<size_t>(i)] =
      std::log(static_cast<double>(i));
  for (int t = k + 1; t <= d; ++t) {
    double m = 0.0;
    double comp = 0.0;
    for (int h = k - 1; h >= 0; --h) {
      if (h < k - 1) {
        const double term = log_int[static_cast<size_t>(t - h - 2)] -
                            log_int[static_cast<size_t>(k - 1 - h)];
        const double y = term - comp;
        const double sum = m + y;
        comp = (sum - m) - y;
        m = sum;
      }
      f(h, t, m);
    }
  }
}

// Same idea for the gamma = 1 sweep: visits t in [k, d] with
// log C(t-1, k-1), maintained via C(n+1, r) = C(n, r) * (n+1)/(n+1-r).
// The visitor is called as f(t, log_size).
template <typename F>
void for_each_tail_log_size(int d, int k, F&& f) {
  double m = 0.0;
  double comp = 0.0;
  f(k, 0.0);
  for (int t = k + 1; t <= d; ++t) {
    const double term = std::log(static_cast<double>(t - 1) /
                                 static_cast<double>(t - k));
    const double y = term - comp;
    const double sum = m + y;
    comp = (sum - m) - y;
    m = sum;
    f(t, m);
  }
}

// Result of the class-level arg-max. For gamma < 1 both h and t are
// drawn; for gamma = 1 with t > k only t is drawn (h = -1) and the member
// sampler resolves the rest.
struct ClassSample {
  int h;
  int t;
  double noisy_value;
};

// Arg-max over all 1 + k(d-k) classes (gamma < 1, O(dk)) or over the
// d-k+1 tail values (gamma = 1, O(d)). Scores must be normalized to
// sensitivity 1. Requires 1 <= k <= d-1.
ClassSample sample_class(const ScoreVector& scores, int k, double epsilon,
                         double gamma, NoiseKind noise, Rng& rng);

// Uniform member of the sampled class, as ascending item indices.
// For a full (h, t) draw: top-h head, a uniform (k-1-h)-subset of the
// ranks strictly between h+1 and t, and the tail j_t. For a tail-only
// draw (gamma = 1): a uniform (k-1)-subset of the top t-1 ranks plus j_t,
// which is exactly uniform over the union of classes with that tail.
std::vector<int> sample_member(const ClassSample& cls, int k,
                               const ScoreVector& scores, Rng& rng);

// Exact probability mass over all utility classes under Gumbel noise
// (the exponential-mechanism instantiation), stored in log space.
class ClassDistribution {
 public:
  ClassDistribution(int d, int k, double epsilon, double gamma,
                    std::vector<double> log_prob);

  int dimension() const { return d_; }
  int k() const { return k_; }
  double epsilon() const { return epsilon_; }
  double gamma() const { return gamma_; }

  size_t num_classes() const { return log_prob_.size(); }
  // Entry 0 is the top class (k-1, k); the rest follow the sweep order.
  std::pair<int, int> class_at(size_t i) const;
  double log_prob_at(size_t i) const { return log_prob_[i]; }
  double log_prob(int h, int t) const;

 private:
  int d_;
  int k_;
  double epsilon_;
  double gamma_;
  std::vector<double> log_prob_;
};

// Per-class log probabilities log Pr[C_{h,t}] = log|C_{h,t}| +
// (eps/2)(gamma x_(t) - (1-gamma) x_(h+1)) - log Z. O(dk) time and space.
// Only valid for Gumbel noise; there is no closed form for the others.
ClassDistribution exact_class_distribution(const ScoreVector& scores, int k,
                                           double epsilon, double gamma);

// O(d) tail marginal for gamma = 1: log Pr[t] for t in [k, d], normalized.
std::vector<double> exact_tail_marginal(const ScoreVector& scores, int k,
                                        double epsilon);

// One sampled k-subset with its class, canonical loss, and the winning
// noisy objective value.
struct Selection {
  std::vector<int> items;  // ascending item indices
  UtilityClass cls;
  double loss;
  double noisy_value;
};

// Canonical subset selection: class arg-max plus a uniform member draw.
Selection canonical_select(const ScoreVector& scores, int k, double epsilon,
                           double gamma, NoiseKind noise, Rng& rng);

}  // namespace dptopk

#endif  // DPTOPK_CANONICAL_HPP_
