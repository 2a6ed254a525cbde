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

#include "dptopk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace dptopk {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Effective rank prefix of a class: the top class contains the whole
// top-k even though its label is (k-1, k).
int prefix_of(int h, int t, int k) { return (t == k) ? k : h; }

void validate_subset(const std::vector<int>& subset,
                     const ScoreVector& scores) {
  if (subset.empty() ||
      subset.size() > static_cast<size_t>(scores.dimension())) {
    throw std::invalid_argument("subset size out of range");
  }
  std::vector<char> seen(static_cast<size_t>(scores.dimension()), 0);
  for (int idx : subset) {
    if (idx < 0 || idx >= scores.dimension()) {
      throw std::invalid_argument("subset index out of range");
    }
    if (seen[static_cast<size_t>(idx)]++) {
      throw std::invalid_argument("subset contains a duplicate index");
    }
  }
}

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double w : v) sum += std::exp(w - mx);
  return mx + std::log(sum);
}

}  // namespace

bool Predicate::matches(int h, int t) const {
  const int prefix = prefix_of(h, t, k);
  switch (variant) {
    case Variant::Top:
      return h == k - 1 && t == k;
    case Variant::Great:
      return prefix >= ceil_div(k, 10) && t <= (11 * k) / 10;
    case Variant::Good:
      return prefix >= ceil_div(k, 100) && t <= (3 * k) / 2;
  }
  return false;
}

std::string Predicate::name() const {
  switch (variant) {
    case Variant::Top:
      return "TOP";
    case Variant::Great:
      return "GREAT";
    case Variant::Good:
      return "GOOD";
  }
  return "?";
}

UtilityClass classify_subset(const std::vector<int>& subset,
                             const ScoreVector& scores) {
  validate_subset(subset, scores);
  const int k = static_cast<int>(subset.size());
  int max_rank = -1;
  std::vector<char> present(static_cast<size_t>(scores.dimension()), 0);
  for (int idx : subset) {
    const int r = scores.index_to_rank()[static_cast<size_t>(idx)];
    present[static_cast<size_t>(r)] = 1;
    max_rank = std::max(max_rank, r);
  }
  int prefix = 0;
  while (prefix < k && present[static_cast<size_t>(prefix)]) ++prefix;
  if (prefix == k) {
    return UtilityClass{k - 1, k, 0.0};
  }
  const int h = prefix;
  const int t = max_rank + 1;  // 1-based tail rank
  return UtilityClass{h, t, log_class_size(h, t, k)};
}

void for_each_subset(int d, int k,
                     const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> combo(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) combo[static_cast<size_t>(i)] = i;
  while (true) {
    fn(combo);
    int i = k - 1;
    while (i >= 0 && combo[static_cast<size_t>(i)] == d - k + i) --i;
    if (i < 0) break;
    ++combo[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) {
      combo[static_cast<size_t>(j)] = combo[static_cast<size_t>(j - 1)] + 1;
    }
  }
}

BruteForceDistribution brute_force_distribution(const ScoreVector& scores,
                                                int k, double epsilon,
                                                double gamma) {
  const int d = scores.dimension();
  if (k < 1 || k > d - 1) {
    throw std::invalid_argument("brute_force_distribution: k out of range");
  }
  const double count = std::exp(log_binomial(d, k));
  if (count > static_cast<double>(kBruteForceSubsetCap)) {
    throw std::invalid_argument(
        "brute_force_distribution: C(d, k) exceeds the subset cap");
  }

  BruteForceDistribution out;
  for_each_subset(d, k, [&](const std::vector<int>& combo) {
    const UtilityClass cls = classify_subset(combo, scores);
    const double loss = class_loss(cls.h, cls.t, gamma, scores);
    out.subsets.push_back(combo);
    out.log_prob.push_back(-0.5 * epsilon * loss);
  });

  const double log_z = log_sum_exp(out.log_prob);
  for (double& w : out.log_prob) w -= log_z;

  std::map<std::pair<int, int>, std::vector<double>> per_class;
  for (size_t i = 0; i < out.subsets.size(); ++i) {
    const UtilityClass cls = classify_subset(out.subsets[i], scores);
    per_class[{cls.h, cls.t}].push_back(out.log_prob[i]);
  }
  for (const auto& [key, logs] : per_class) {
    out.class_log_prob[key] = log_sum_exp(logs);
  }
  return out;
}

double canonical_loss_oracle(const std::vector<int>& subset,
                             const ScoreVector& scores) {
  validate_subset(subset, scores);
  const int d = scores.dimension();
  std::vector<char> in_subset(static_cast<size_t>(d), 0);
  for (int idx : subset) in_subset[static_cast<size_t>(idx)] = 1;

  double best_missing = -std::numeric_limits<double>::infinity();
  double worst_present = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    const double v = scores.raw()[static_cast<size_t>(i)];
    if (in_subset[static_cast<size_t>(i)]) {
      worst_present = std::min(worst_present, v);
    } else {
      best_missing = std::max(best_missing, v);
    }
  }
  const double gap = std::max(0.0, best_missing - worst_present);
  const double loss = 0.5 * gap;

  // Witness: raising the subset by gap/2 and lowering the rest by gap/2
  // must make the subset optimal (ties allowed).
  double min_in = std::numeric_limits<double>::infinity();
  double max_out = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    const double v = scores.raw()[static_cast<size_t>(i)];
    if (in_subset[static_cast<size_t>(i)]) {
      min_in = std::min(min_in, v + loss);
    } else {
      max_out = std::max(max_out, v - loss);
    }
  }
  const double slack = 1e-12 * std::max(1.0, std::fabs(max_out));
  if (subset.size() < static_cast<size_t>(d) && min_in < max_out - slack) {
    throw std::logic_error(
        "canonical_loss_oracle: optimality witness failed");
  }
  return loss;
}

double joint_loss(const std::vector<int>& subset, const ScoreVector& scores) {
  validate_subset(subset, scores);
  const int k = static_cast<int>(subset.size());
  std::vector<double> chosen;
  chosen.reserve(subset.size());
  for (int idx : subset) chosen.push_back(scores.raw()[static_cast<size_t>(idx)]);
  std::sort(chosen.begin(), chosen.end(), std::greater<double>());
  double worst = 0.0;
  for (int l = 0; l < k; ++l) {
    worst = std::max(worst, 0.5 * (scores.order_stat(l + 1) -
                                   chosen[static_cast<size_t>(l)]));
  }
  return worst;
}

double predicate_probability(const ClassDistribution& dist,
                             const Predicate& pred) {
  std::vector<double> logs;
  for (size_t i = 0; i < dist.num_classes(); ++i) {
    const auto [h, t] = dist.class_at(i);
    if (pred.matches(h, t)) logs.push_back(dist.log_prob_at(i));
  }
  if (logs.empty()) return 0.0;
  return std::min(1.0, std::exp(log_sum_exp(logs)));
}

McEstimate mc_estimate(const SubsetMechanism& mechanism,
                       const ScoreVector& scores, const Predicate& pred,
                       long trials, Rng& rng, int threads) {
  if (trials < 1) throw std::invalid_argument("mc_estimate: trials must be >= 1");
  if (threads < 1) threads = 1;
  if (static_cast<long>(threads) > trials) threads = static_cast<int>(trials);

  auto run_range = [&](long begin, long end, long& hits_out) {
    long hits = 0;
    for (long trial = begin; trial < end; ++trial) {
      Rng trial_rng = rng.substream(static_cast<uint64_t>(trial));
      const std::vector<int> picked = mechanism(trial_rng);
      const UtilityClass cls = classify_subset(picked, scores);
      if (pred.matches(cls.h, cls.t)) ++hits;
    }
    hits_out = hits;
  };

  long hits = 0;
  if (threads == 1) {
    run_range(0, trials, hits);
  } else {
    std::vector<long> partial(static_cast<size_t>(threads), 0);
    std::vector<std::thread> pool;
    const long chunk = (trials + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const long begin = w * chunk;
      const long end = std::min(trials, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end,
                        std::ref(partial[static_cast<size_t>(w)]));
    }
    for (auto& th : pool) th.join();
    for (long p : partial) hits += p;
  }

  const double p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  const double std_err =
      std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
  return McEstimate{p_hat, std_err};
}

double log_c_dk(int d, int k) {
  return log_binomial(d, k) -
         k * std::log(static_cast<double>(d) / static_cast<double>(k));
}

double utility_bound(const BoundInputs& in, BoundKind which,
                     bool exact_log_c) {
  if (in.k < 1 || in.k >= in.d) {
    throw std::invalid_argument("utility_bound: need 1 <= k < d");
  }
  if (!(in.alpha > 0.0 && in.alpha <= 0.1)) {
    throw std::invalid_argument("utility_bound: alpha must lie in (0, 0.1]");
  }
  if (!(in.epsilon > 0.0) || !(in.delta_loss > 0.0)) {
    throw std::invalid_argument(
        "utility_bound: epsilon and delta_loss must be positive");
  }
  if (!(in.gamma > 0.0 && in.gamma <= 1.0)) {
    throw std::invalid_argument("utility_bound: gamma must lie in (0, 1]");
  }
  const double k = in.k;
  const double d = in.d;
  if (which == BoundKind::Canonical) {
    const double c_term = exact_log_c ? log_c_dk(in.d, in.k) : k;
    const double e_term = k * std::log(d / k) + std::log(1.0 / in.alpha) + c_term;
    return (2.0 * in.delta_loss / (in.gamma * in.epsilon)) * e_term;
  }
  const double e_term =
      k * std::log(d * k) + k * std::log(1.0 / in.alpha) - 0.06 * k;
  return (2.0 * in.delta_loss / in.epsilon) * e_term;
}

LeapExpectations leap_expectations(int d, int k, double gamma) {
  if (k < 1 || k >= d - 1) {
    throw std::invalid_argument("leap_expectations: need 1 <= k < d-1");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("leap_expectations: gamma must lie in (0, 1]");
  }
  const double kk = k;
  const double e_canonical =
      (1.0 / gamma) *
      (kk * std::log(static_cast<double>(d) / kk) + log_c_dk(d, k));
  const double e_peeling =
      kk * std::log(static_cast<double>(d - 1 - k) * kk);
  return LeapExpectations{e_canonical, e_peeling};
}

namespace {

// Per-subset log probabilities under the canonical mechanism for one
// input, in the enumeration order of for_each_subset. Within a class all
// members are equally likely, so a subset's probability is its class mass
// spread over the class size.
std::vector<double> subset_log_probs(const ScoreVector& scores, int k,
                                     double epsilon, double gamma) {
  const ClassDistribution dist =
      exact_class_distribution(scores, k, epsilon, gamma);
  std::vector<double> out;
  for_each_subset(scores.dimension(), k, [&](const std::vector<int>& combo) {
    const UtilityClass cls = classify_subset(combo, scores);
    out.push_back(dist.log_prob(cls.h, cls.t) - cls.log_size);
  });
  return out;
}

}  // namespace

double dp_audit_exact(const ScoreVector& scores, int k, double epsilon,
                      double gamma, int n_random, Rng& rng) {
  const int d = scores.dimension();
  if (std::exp(log_binomial(d, k)) > static_cast<double>(kBruteForceSubsetCap)) {
    throw std::invalid_argument("dp_audit_exact: C(d, k) exceeds the cap");
  }
  const std::vector<double> base = subset_log_probs(scores, k, epsilon, gamma);

  std::vector<std::vector<double>> perturbations;
  for (int n = 0; n < n_random; ++n) {
    std::vector<double> delta(static_cast<size_t>(d));
    for (double& v : delta) v = 2.0 * rng.uniform_open() - 1.0;
    perturbations.push_back(std::move(delta));
  }
  // Extreme patterns: the all-ones shifts (which must have no effect) and
  // the adversarial split along the original top-k boundary.
  perturbations.emplace_back(static_cast<size_t>(d), 1.0);
  perturbations.emplace_back(static_cast<size_t>(d), -1.0);
  std::vector<double> split(static_cast<size_t>(d), -1.0);
  for (int r = 0; r < k; ++r) {
    split[static_cast<size_t>(scores.rank_to_index()[static_cast<size_t>(r)])] =
        1.0;
  }
  perturbations.push_back(split);
  for (double& v : split) v = -v;
  perturbations.push_back(split);

  double worst = 0.0;
  for (const auto& delta : perturbations) {
    std::vector<double> moved = scores.raw();
    for (int i = 0; i < d; ++i) moved[static_cast<size_t>(i)] += delta[static_cast<size_t>(i)];
    const ScoreVector neighbor(std::move(moved));
    const std::vector<double> probs =
        subset_log_probs(neighbor, k, epsilon, gamma);
    for (size_t i = 0; i < base.size(); ++i) {
      worst = std::max(worst, std::fabs(base[i] - probs[i]));
    }
  }
  return worst;
}

}  // namespace dptopk
