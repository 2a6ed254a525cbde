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

#include "dptopk/canonical.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dptopk {

namespace {

void validate_class(int h, int t, int k) {
  if (k < 1) throw std::invalid_argument("utility class: k must be >= 1");
  if (h < 0 || h > k - 1) {
    throw std::invalid_argument("utility class: h must lie in [0, k-1]");
  }
  if (t < k) throw std::invalid_argument("utility class: t must be >= k");
  if (t == k && h != k - 1) {
    throw std::invalid_argument("utility class: t = k requires h = k-1");
  }
}

void validate_canonical_args(const ScoreVector& scores, int k, double epsilon,
                             double gamma) {
  if (k < 1 || k > scores.dimension() - 1) {
    throw std::invalid_argument("canonical: k must lie in [1, d-1]");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("canonical: epsilon must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("canonical: gamma must lie in [0, 1]");
  }
}

// Uniform r-subset of the integer range [lo, hi] via Floyd's algorithm.
std::set<int> floyd_sample(int lo, int hi, int r, Rng& rng) {
  const int n = hi - lo + 1;
  std::set<int> chosen;
  for (int j = n - r; j < n; ++j) {
    const int pick = lo + rng.uniform_int(j + 1);
    if (!chosen.insert(pick).second) chosen.insert(lo + j);
  }
  return chosen;
}

}  // namespace

double log_binomial(long n, long r) {
  if (r < 0 || n < 0 || r > n) {
    throw std::invalid_argument("log_binomial: need 0 <= r <= n");
  }
  if (r == 0 || r == n) return 0.0;
  if (n <= 62) {
    // Exact in 64-bit integers up to n = 62 for every r.
    unsigned long long c = 1;
    const long rr = std::min(r, n - r);
    for (long i = 1; i <= rr; ++i) {
      c = c * static_cast<unsigned long long>(n - rr + i) /
          static_cast<unsigned long long>(i);
    }
    return std::log(static_cast<double>(c));
  }
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(r) + 1.0) -
         std::lgamma(static_cast<double>(n - r) + 1.0);
}

double log_class_size(int h, int t, int k) {
  validate_class(h, t, k);
  if (t == k) return 0.0;
  return log_binomial(t - h - 2, k - 1 - h);
}

double log_class_size_sum(int t, int k) {
  if (k < 1 || t < k) {
    throw std::invalid_argument("log_class_size_sum: need t >= k >= 1");
  }
  return log_binomial(t - 1, k - 1);
}

double class_loss(int h, int t, double gamma, const ScoreVector& scores) {
  // Full (h, t, k) consistency is enforced where classes are created;
  // here only the rank arithmetic must be sound.
  if (h < 0 || t < h + 1 || t > scores.dimension() ||
      h + 1 > scores.dimension()) {
    throw std::invalid_argument("class_loss: invalid (h, t)");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("class_loss: gamma must lie in [0, 1]");
  }
  return (1.0 - gamma) * scores.order_stat(h + 1) -
         gamma * scores.order_stat(t);
}

ClassSample sample_class(const ScoreVector& scores, int k, double epsilon,
                         double gamma, NoiseKind noise, Rng& rng) {
  validate_canonical_args(scores, k, epsilon, gamma);
  const int d = scores.dimension();
  const std::vector<double>& x = scores.sorted();

  if (gamma < 1.0) {
    const double eps_head = 0.5 * (1.0 - gamma) * epsilon;
    const double eps_tail = 0.5 * gamma * epsilon;
    int best_h = k - 1;
    int best_t = k;
    double best_v = (eps_tail - eps_head) * x[static_cast<size_t>(k - 1)] +
                    detail::quantile_log_uniform(noise, rng.log_uniform(), 0.0);
    for_each_class_log_size(d, k, [&](int h, int t, double m) {
      const double noise_term =
          detail::quantile_log_uniform(noise, rng.log_uniform(), m);
      const double v = eps_tail * x[static_cast<size_t>(t - 1)] -
                       eps_head * x[static_cast<size_t>(h)] + noise_term;
      if (v > best_v) {
        best_v = v;
        best_h = h;
        best_t = t;
      }
    });
    return ClassSample{best_h, best_t, best_v};
  }

  // gamma = 1: only the tail rank carries loss; O(d).
  const double half_eps = 0.5 * epsilon;
  int best_t = k;
  double best_v = 0.0;
  for_each_tail_log_size(d, k, [&](int t, double m) {
    const double v = half_eps * x[static_cast<size_t>(t - 1)] +
                     detail::quantile_log_uniform(noise, rng.log_uniform(), m);
    if (t == k || v > best_v) {
      best_v = v;
      best_t = t;
    }
  });
  return ClassSample{best_t == k ? k - 1 : -1, best_t, best_v};
}

std::vector<int> sample_member(const ClassSample& cls, int k,
                               const ScoreVector& scores, Rng& rng) {
  const int d = scores.dimension();
  if (k < 1 || k > d) {
    throw std::invalid_argument("sample_member: k must lie in [1, d]");
  }
  if (cls.t < k || cls.t > d) {
    throw std::invalid_argument("sample_member: t out of range");
  }
  std::vector<int> ranks;
  ranks.reserve(static_cast<size_t>(k));
  if (cls.h >= 0) {
    validate_class(cls.h, cls.t, k);
    if (cls.t == k) {
      for (int r = 0; r < k; ++r) ranks.push_back(r);
    } else {
      for (int r = 0; r < cls.h; ++r) ranks.push_back(r);
      // Body: uniform (k-1-h)-subset of the 0-based ranks h+1 .. t-3,
      // i.e. the items strictly between rank h+1 and the tail.
      const int body = k - 1 - cls.h;
      if (body > 0) {
        if (cls.t - cls.h - 2 < body) {
          throw std::invalid_argument("sample_member: inconsistent class");
        }
        for (int r : floyd_sample(cls.h + 1, cls.t - 2, body, rng)) {
          ranks.push_back(r);
        }
      }
      ranks.push_back(cls.t - 1);
    }
  } else {
    // Tail-only draw (gamma = 1, t > k): uniform (k-1)-subset of the top
    // t-1 ranks plus the tail. Every such subset lies in exactly one
    // class C_{h,t}, so this is uniform over their union.
    if (cls.t <= k) {
      throw std::invalid_argument("sample_member: tail-only draw needs t > k");
    }
    for (int r : floyd_sample(0, cls.t - 2, k - 1, rng)) ranks.push_back(r);
    ranks.push_back(cls.t - 1);
  }

  std::vector<int> items;
  items.reserve(ranks.size());
  for (int r : ranks) {
    items.push_back(scores.rank_to_index()[static_cast<size_t>(r)]);
  }
  std::sort(items.begin(), items.end());
  return items;
}

ClassDistribution::ClassDistribution(int d, int k, double epsilon,
                                     double gamma,
                                     std::vector<double> log_prob)
    : d_(d), k_(k), epsilon_(epsilon), gamma_(gamma),
      log_prob_(std::move(log_prob)) {}

std::pair<int, int> ClassDistribution::class_at(size_t i) const {
  if (i == 0) return {k_ - 1, k_};
  const size_t j = i - 1;
  const int t = k_ + 1 + static_cast<int>(j / static_cast<size_t>(k_));
  const int h = k_ - 1 - static_cast<int>(j % static_cast<size_t>(k_));
  return {h, t};
}

double ClassDistribution::log_prob(int h, int t) const {
  validate_class(h, t, k_);
  if (t == k_) return log_prob_[0];
  const size_t idx = 1 +
      static_cast<size_t>(t - k_ - 1) * static_cast<size_t>(k_) +
      static_cast<size_t>(k_ - 1 - h);
  return log_prob_[idx];
}

ClassDistribution exact_class_distribution(const ScoreVector& scores, int k,
                                           double epsilon, double gamma) {
  validate_canonical_args(scores, k, epsilon, gamma);
  const int d = scores.dimension();
  const std::vector<double>& x = scores.sorted();
  const double eps_head = 0.5 * (1.0 - gamma) * epsilon;
  const double eps_tail = 0.5 * gamma * epsilon;

  std::vector<double> log_w;
  log_w.reserve(1 + static_cast<size_t>(k) * static_cast<size_t>(d - k));
  log_w.push_back((eps_tail - eps_head) * x[static_cast<size_t>(k - 1)]);
  for_each_class_log_size(d, k, [&](int h, int t, double m) {
    log_w.push_back(m + eps_tail * x[static_cast<size_t>(t - 1)] -
                    eps_head * x[static_cast<size_t>(h)]);
  });

  const double max_w = *std::max_element(log_w.begin(), log_w.end());
  double sum = 0.0;
  for (double w : log_w) sum += std::exp(w - max_w);
  const double log_z = max_w + std::log(sum);
  for (double& w : log_w) w -= log_z;
  return ClassDistribution(d, k, epsilon, gamma, std::move(log_w));
}

std::vector<double> exact_tail_marginal(const ScoreVector& scores, int k,
                                        double epsilon) {
  validate_canonical_args(scores, k, epsilon, 1.0);
  const int d = scores.dimension();
  const std::vector<double>& x = scores.sorted();
  std::vector<double> log_w;
  log_w.reserve(static_cast<size_t>(d - k) + 1);
  for_each_tail_log_size(d, k, [&](int t, double m) {
    log_w.push_back(m + 0.5 * epsilon * x[static_cast<size_t>(t - 1)]);
  });
  const double max_w = *std::max_element(log_w.begin(), log_w.end());
  double sum = 0.0;
  for (double w : log_w) sum += std::exp(w - max_w);
  const double log_z = max_w + std::log(sum);
  for (double& w : log_w) w -= log_z;
  return log_w;
}

Selection canonical_select(const ScoreVector& scores, int k, double epsilon,
                           double gamma, NoiseKind noise, Rng& rng) {
  const ClassSample draw = sample_class(scores, k, epsilon, gamma, noise, rng);
  std::vector<int> items = sample_member(draw, k, scores, rng);

  int h = draw.h;
  if (h < 0) {
    // Tail-only draw: resolve h as the longest fully-present rank prefix.
    std::vector<char> present(static_cast<size_t>(draw.t), 0);
    for (int idx : items) {
      const int r = scores.index_to_rank()[static_cast<size_t>(idx)];
      present[static_cast<size_t>(r)] = 1;
    }
    h = 0;
    while (h < k - 1 && present[static_cast<size_t>(h)]) ++h;
  }
  UtilityClass cls{h, draw.t, log_class_size(h, draw.t, k)};
  Selection out;
  out.items = std::move(items);
  out.cls = cls;
  out.loss = class_loss(cls.h, cls.t, gamma, scores);
  out.noisy_value = draw.noisy_value;
  return out;
}

}  // namespace dptopk
