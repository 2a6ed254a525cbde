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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "dptopk/analysis.hpp"
#include "dptopk/canonical.hpp"
#include "stats_support.hpp"

using dptopk::ClassDistribution;
using dptopk::ClassSample;
using dptopk::NoiseKind;
using dptopk::Rng;
using dptopk::ScoreVector;
using dptopk::UtilityClass;

namespace {

// Exact 64-bit binomial coefficient, independent of the library.
unsigned long long binom_u64(int n, int r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  unsigned long long c = 1;
  for (int i = 1; i <= r; ++i) {
    c = c * static_cast<unsigned long long>(n - r + i) /
        static_cast<unsigned long long>(i);
  }
  return c;
}

std::vector<double> random_scores(int d, double lo, double hi, Rng& rng) {
  std::vector<double> out(static_cast<size_t>(d));
  for (double& v : out) v = lo + (hi - lo) * rng.uniform_open();
  return out;
}

double rel_gap(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

}  // namespace

TEST_CASE("log_class_size anchor values") {
  CHECK(dptopk::log_class_size(1, 2, 2) == 0.0);   // the top class
  CHECK(dptopk::log_class_size(4, 5, 5) == 0.0);
  CHECK(dptopk::log_class_size(1, 7, 2) == 0.0);   // h = k-1, empty body
  CHECK(dptopk::log_class_size(0, 4, 2) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // All 2-subsets of 5 items, summed over classes.
  double total = 0.0;
  total += std::exp(dptopk::log_class_size(1, 2, 2));
  for (int t = 3; t <= 5; ++t) {
    for (int h = 0; h <= 1; ++h) {
      total += std::exp(dptopk::log_class_size(h, t, 2));
    }
  }
  CHECK(total == doctest::Approx(10.0).epsilon(1e-12));

  CHECK_THROWS_AS(dptopk::log_class_size(2, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(dptopk::log_class_size(0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(dptopk::log_class_size(-1, 4, 2), std::invalid_argument);
}

TEST_CASE("log_class_size_sum anchor values") {
  CHECK(dptopk::log_class_size_sum(3, 3) == 0.0);
  CHECK(dptopk::log_class_size_sum(4, 2) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(dptopk::log_class_size_sum(9, 1) == 0.0);
  CHECK_THROWS_AS(dptopk::log_class_size_sum(1, 2), std::invalid_argument);
}

TEST_CASE("class partition counts are exact integers up to d = 14") {
  for (int d = 2; d <= 14; ++d) {
    for (int k = 1; k < d; ++k) {
      unsigned long long total = 1;  // the top class
      for (int t = k + 1; t <= d; ++t) {
        for (int h = 0; h <= k - 1; ++h) {
          const double ls = dptopk::log_class_size(h, t, k);
          const unsigned long long size =
              static_cast<unsigned long long>(std::llround(std::exp(ls)));
          CHECK(size == binom_u64(t - h - 2, k - 1 - h));
          total += size;
        }
      }
      CHECK(total == binom_u64(d, k));
    }
  }
}

TEST_CASE("tail identity: class sizes sum to C(t-1, k-1)") {
  for (int d : {6, 12, 30}) {
    for (int k : {1, 2, 5}) {
      if (k >= d) continue;
      for (int t = k; t <= d; ++t) {
        double sum = 0.0;
        if (t == k) {
          sum = 1.0;
        } else {
          for (int h = 0; h <= k - 1; ++h) {
            sum += std::exp(dptopk::log_class_size(h, t, k));
          }
        }
        const double expected = std::exp(dptopk::log_class_size_sum(t, k));
        CHECK(rel_gap(sum, expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("incremental recurrences track the log-gamma route") {
  const int d = 400;
  const int k = 50;
  double worst = 0.0;
  dptopk::for_each_class_log_size(d, k, [&](int h, int t, double m) {
    worst = std::max(worst, rel_gap(m, dptopk::log_class_size(h, t, k)));
  });
  CHECK(worst <= 1e-10);

  worst = 0.0;
  dptopk::for_each_tail_log_size(d, k, [&](int t, double m) {
    worst = std::max(worst, rel_gap(m, dptopk::log_class_size_sum(t, k)));
  });
  CHECK(worst <= 1e-10);
}

TEST_CASE("class_loss anchor values") {
  // Descending scores 10..1; class (h=1, t=10) at gamma = 1/2 loses
  // (9 - 1)/2 = 4.
  std::vector<double> raw(10);
  for (int i = 0; i < 10; ++i) raw[static_cast<size_t>(i)] = 10.0 - i;
  const ScoreVector scores(raw);
  CHECK(dptopk::class_loss(1, 10, 0.5, scores) == doctest::Approx(4.0));
  CHECK(dptopk::class_loss(2, 3, 0.5, scores) == doctest::Approx(0.0));
  CHECK(dptopk::class_loss(1, 6, 1.0, scores) ==
        doctest::Approx(-scores.order_stat(6)));
  CHECK_THROWS_AS(dptopk::class_loss(-1, 4, 0.5, scores),
                  std::invalid_argument);
  CHECK_THROWS_AS(dptopk::class_loss(0, 11, 0.5, scores),
                  std::invalid_argument);
}

TEST_CASE("minimal domain d = k+1 exposes exactly k+1 classes") {
  const int k = 4;
  const int d = k + 1;
  int cells = 1;
  dptopk::for_each_class_log_size(d, k, [&](int, int t, double) {
    CHECK(t == k + 1);
    ++cells;
  });
  CHECK(cells == k + 1);
}

TEST_CASE("sample_class domain errors") {
  Rng rng(1);
  const ScoreVector scores({3.0, 2.0, 1.0});
  CHECK_THROWS_AS(
      dptopk::sample_class(scores, 3, 1.0, 0.5, NoiseKind::Gumbel, rng),
      std::invalid_argument);
  CHECK_THROWS_AS(
      dptopk::sample_class(scores, 0, 1.0, 0.5, NoiseKind::Gumbel, rng),
      std::invalid_argument);
  CHECK_THROWS_AS(
      dptopk::sample_class(scores, 1, -1.0, 0.5, NoiseKind::Gumbel, rng),
      std::invalid_argument);
  CHECK_THROWS_AS(
      dptopk::sample_class(scores, 1, 1.0, 1.5, NoiseKind::Gumbel, rng),
      std::invalid_argument);
}

TEST_CASE("exact distribution normalizes and degenerates correctly") {
  Rng rng(2);
  const ScoreVector uniform_scores({1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
  const int k = 2;
  const ClassDistribution dist =
      dptopk::exact_class_distribution(uniform_scores, k, 1.0, 0.5);

  // Total mass 1 in log space.
  double mass = 0.0;
  for (size_t i = 0; i < dist.num_classes(); ++i) {
    mass += std::exp(dist.log_prob_at(i));
  }
  CHECK(std::fabs(mass - 1.0) <= 1e-12);

  // Equal scores: every subset equally likely, classes weighted by size.
  const double total = static_cast<double>(binom_u64(6, k));
  CHECK(std::exp(dist.log_prob(k - 1, k)) ==
        doctest::Approx(1.0 / total).epsilon(1e-9));
  for (size_t i = 0; i < dist.num_classes(); ++i) {
    const auto [h, t] = dist.class_at(i);
    const double expect =
        std::exp(dptopk::log_class_size(h, t, k)) / total;
    CHECK(std::exp(dist.log_prob_at(i)) ==
          doctest::Approx(expect).epsilon(1e-9));
  }

  // Vanishing privacy budget: class mass proportional to size for any
  // score vector.
  const ScoreVector skewed(random_scores(6, 0.0, 3.0, rng));
  const ClassDistribution tiny =
      dptopk::exact_class_distribution(skewed, k, 1e-12, 0.5);
  for (size_t i = 0; i < tiny.num_classes(); ++i) {
    const auto [h, t] = tiny.class_at(i);
    const double expect = std::exp(dptopk::log_class_size(h, t, k)) / total;
    CHECK(rel_gap(std::exp(tiny.log_prob_at(i)), expect) <= 1e-6);
  }
}

TEST_CASE("exact distribution equals the brute-force class marginals") {
  Rng rng(3);
  const ScoreVector scores({5.0, 4.0, 3.0, 2.0, 1.0});
  const int k = 2;
  for (double gamma : {0.0, 0.5, 1.0}) {
    const ClassDistribution dist =
        dptopk::exact_class_distribution(scores, k, 1.0, gamma);
    const dptopk::BruteForceDistribution brute =
        dptopk::brute_force_distribution(scores, k, 1.0, gamma);
    for (const auto& [key, log_p] : brute.class_log_prob) {
      CHECK(std::fabs(std::exp(dist.log_prob(key.first, key.second)) -
                      std::exp(log_p)) <= 1e-9);
    }
  }
}

TEST_CASE("tail marginal agrees with the full distribution") {
  Rng rng(4);
  const ScoreVector scores(random_scores(9, 0.0, 2.5, rng));
  const int k = 3;
  const double epsilon = 1.2;
  const ClassDistribution dist =
      dptopk::exact_class_distribution(scores, k, epsilon, 1.0);
  const std::vector<double> tail =
      dptopk::exact_tail_marginal(scores, k, epsilon);
  for (int t = k; t <= 9; ++t) {
    double mass = 0.0;
    if (t == k) {
      mass = std::exp(dist.log_prob(k - 1, k));
    } else {
      for (int h = 0; h <= k - 1; ++h) {
        mass += std::exp(dist.log_prob(h, t));
      }
    }
    CHECK(rel_gap(mass, std::exp(tail[static_cast<size_t>(t - k)])) <= 1e-10);
  }
}

TEST_CASE("sampled class frequencies match the exact distribution") {
  Rng seed_rng(5);
  const int d = 6;
  const int k = 2;
  const ScoreVector scores(random_scores(d, 0.0, 2.0, seed_rng));
  const double epsilon = 1.0;

  for (double gamma : {0.0, 0.5, 1.0}) {
    const ClassDistribution dist =
        dptopk::exact_class_distribution(scores, k, epsilon, gamma);
    std::vector<long> counts(dist.num_classes(), 0);
    std::map<std::pair<int, int>, size_t> index_of;
    std::vector<double> expected(dist.num_classes());
    for (size_t i = 0; i < dist.num_classes(); ++i) {
      index_of[dist.class_at(i)] = i;
      expected[i] = std::exp(dist.log_prob_at(i));
    }

    const long trials = 200000;
    Rng rng(600 + static_cast<uint64_t>(gamma * 10));
    for (long i = 0; i < trials; ++i) {
      Rng trial = rng.substream(static_cast<uint64_t>(i));
      const ClassSample cs =
          dptopk::sample_class(scores, k, epsilon, gamma, NoiseKind::Gumbel,
                               trial);
      if (cs.h >= 0) {
        ++counts[index_of.at({cs.h, cs.t})];
      } else {
        // Tail-only draw: attribute by sampling the member.
        Rng member_rng = trial.substream(1);
        const std::vector<int> items =
            dptopk::sample_member(cs, k, scores, member_rng);
        const UtilityClass cls = dptopk::classify_subset(items, scores);
        ++counts[index_of.at({cls.h, cls.t})];
      }
    }
    const double p = teststats::chi2_pvalue(counts, expected, trials);
    INFO("gamma=", gamma, " p=", p);
    CHECK(p > 0.001);
  }
}

TEST_CASE("gamma = 1 tail frequencies match the closed form") {
  Rng seed_rng(6);
  const int d = 7;
  const int k = 2;
  const ScoreVector scores(random_scores(d, 0.0, 2.0, seed_rng));
  const double epsilon = 0.8;
  const std::vector<double> tail =
      dptopk::exact_tail_marginal(scores, k, epsilon);

  const long trials = 200000;
  std::vector<long> counts(tail.size(), 0);
  Rng rng(700);
  for (long i = 0; i < trials; ++i) {
    Rng trial = rng.substream(static_cast<uint64_t>(i));
    const ClassSample cs =
        dptopk::sample_class(scores, k, epsilon, 1.0, NoiseKind::Gumbel, trial);
    ++counts[static_cast<size_t>(cs.t - k)];
  }
  std::vector<double> expected;
  for (double lp : tail) expected.push_back(std::exp(lp));
  CHECK(teststats::chi2_pvalue(counts, expected, trials) > 0.001);
}

TEST_CASE("sample_member handles the singleton classes deterministically") {
  Rng rng(7);
  const ScoreVector scores({9.0, 7.0, 5.0, 3.0, 1.0});
  const int k = 3;
  // The top class has exactly one member.
  const std::vector<int> top =
      dptopk::sample_member(ClassSample{k - 1, k, 0.0}, k, scores, rng);
  CHECK(top == std::vector<int>{0, 1, 2});
  // h = k-1 with a distant tail: empty body.
  const std::vector<int> tailed =
      dptopk::sample_member(ClassSample{k - 1, 5, 0.0}, k, scores, rng);
  CHECK(tailed == std::vector<int>{0, 1, 4});
}

TEST_CASE("sample_member is uniform within a class") {
  Rng rng(8);
  const ScoreVector scores({5.0, 4.0, 3.0, 2.0, 1.0});
  const int k = 2;
  // Class (0, 4): members {j2, j4} and {j3, j4} (1-based ranks).
  std::map<std::vector<int>, long> counts;
  const long trials = 100000;
  for (long i = 0; i < trials; ++i) {
    Rng trial = rng.substream(static_cast<uint64_t>(i));
    ++counts[dptopk::sample_member(ClassSample{0, 4, 0.0}, k, scores, trial)];
  }
  CHECK(counts.size() == 2);
  std::vector<long> flat;
  for (const auto& [items, c] : counts) {
    const dptopk::UtilityClass cls = dptopk::classify_subset(items, scores);
    CHECK(cls.h == 0);
    CHECK(cls.t == 4);
    flat.push_back(c);
  }
  CHECK(teststats::chi2_uniform_pvalue(flat, trials) > 0.001);
}

TEST_CASE("sample_member rejects inconsistent classes") {
  Rng rng(9);
  const ScoreVector scores({5.0, 4.0, 3.0, 2.0, 1.0});
  CHECK_THROWS_AS(
      dptopk::sample_member(ClassSample{0, 2, 0.0}, 2, scores, rng),
      std::invalid_argument);
  CHECK_THROWS_AS(
      dptopk::sample_member(ClassSample{-1, 2, 0.0}, 2, scores, rng),
      std::invalid_argument);
  CHECK_THROWS_AS(
      dptopk::sample_member(ClassSample{1, 9, 0.0}, 2, scores, rng),
      std::invalid_argument);
}

TEST_CASE("canonical_select output is structurally consistent") {
  Rng seed_rng(10);
  for (int rep = 0; rep < 40; ++rep) {
    const int d = 4 + static_cast<int>(seed_rng.uniform_int(5));
    const int k = 1 + static_cast<int>(seed_rng.uniform_int(d - 1));
    const ScoreVector scores(random_scores(d, -1.0, 3.0, seed_rng));
    const double gamma = (rep % 3) * 0.5;
    Rng rng(1000 + rep);
    const dptopk::Selection sel = dptopk::canonical_select(
        scores, k, 1.0, gamma, NoiseKind::Gumbel, rng);
    CHECK(sel.items.size() == static_cast<size_t>(k));
    const UtilityClass cls = dptopk::classify_subset(sel.items, scores);
    CHECK(cls.h == sel.cls.h);
    CHECK(cls.t == sel.cls.t);
    CHECK(sel.loss ==
          doctest::Approx(dptopk::class_loss(cls.h, cls.t, gamma, scores)));
  }
}

TEST_CASE("two-item canonical selection follows the softmax law") {
  // For d = 2, k = 1 the class weights reduce to a two-way softmax with
  // coefficient gamma * eps / 2 on the score gap.
  const ScoreVector scores({1.4, 0.2});
  const double epsilon = 1.0;
  const double gamma = 0.5;
  const double gap = 1.4 - 0.2;
  const double p_top = 1.0 / (1.0 + std::exp(-0.5 * gamma * epsilon * gap));

  const long trials = 200000;
  long wins = 0;
  Rng rng(11);
  for (long i = 0; i < trials; ++i) {
    Rng trial = rng.substream(static_cast<uint64_t>(i));
    const dptopk::Selection sel =
        dptopk::canonical_select(scores, 1, epsilon, gamma, NoiseKind::Gumbel,
                                 trial);
    if (sel.items == std::vector<int>{0}) ++wins;
  }
  const double p_hat = static_cast<double>(wins) / trials;
  const double sigma = std::sqrt(p_top * (1 - p_top) / trials);
  CHECK(std::fabs(p_hat - p_top) <= 4.0 * sigma);

  // Cross-check against the exact distribution's mass on the top class.
  const ClassDistribution dist =
      dptopk::exact_class_distribution(scores, 1, epsilon, gamma);
  CHECK(std::exp(dist.log_prob(0, 1)) ==
        doctest::Approx(p_top).epsilon(1e-12));
}

TEST_CASE("top-class frequency matches the exact mass") {
  Rng seed_rng(12);
  const ScoreVector scores(random_scores(6, 0.0, 3.0, seed_rng));
  const int k = 2;
  const ClassDistribution dist =
      dptopk::exact_class_distribution(scores, k, 1.0, 0.5);
  const double p_top = std::exp(dist.log_prob(k - 1, k));

  const long trials = 200000;
  long hits = 0;
  Rng rng(13);
  for (long i = 0; i < trials; ++i) {
    Rng trial = rng.substream(static_cast<uint64_t>(i));
    const dptopk::Selection sel =
        dptopk::canonical_select(scores, k, 1.0, 0.5, NoiseKind::Gumbel, trial);
    if (sel.cls.h == k - 1 && sel.cls.t == k) ++hits;
  }
  const double p_hat = static_cast<double>(hits) / trials;
  const double sigma = std::sqrt(p_top * (1 - p_top) / trials);
  CHECK(std::fabs(p_hat - p_top) <= 4.0 * sigma);
}

TEST_CASE("halving gamma at doubled budget can only help the top class") {
  Rng rng(14);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 4 + static_cast<int>(rng.uniform_int(5));
    const ScoreVector scores(random_scores(d, 0.0, 3.0, rng));
    const double epsilon = 0.5 + rng.uniform_open();
    const double p_half = std::exp(
        dptopk::exact_class_distribution(scores, 2, 2.0 * epsilon, 0.5)
            .log_prob(1, 2));
    const double p_one = std::exp(
        dptopk::exact_class_distribution(scores, 2, epsilon, 1.0)
            .log_prob(1, 2));
    CHECK(p_half >= p_one - 1e-12);
  }
}

TEST_CASE("canonical selection is shift invariant and seed deterministic") {
  Rng seed_rng(15);
  const ScoreVector base(random_scores(8, 0.0, 4.0, seed_rng));
  for (NoiseKind kind :
       {NoiseKind::Gumbel, NoiseKind::Exponential, NoiseKind::Laplace}) {
    for (double gamma : {0.5, 1.0}) {
      Rng a(321), b(321), c(321);
      const dptopk::Selection s1 =
          dptopk::canonical_select(base, 3, 1.0, gamma, kind, a);
      const dptopk::Selection s2 =
          dptopk::canonical_select(base.shifted(12.5), 3, 1.0, gamma, kind, b);
      const dptopk::Selection s3 =
          dptopk::canonical_select(base, 3, 1.0, gamma, kind, c);
      CHECK(s1.items == s2.items);
      CHECK(s1.items == s3.items);
      CHECK(s1.cls.h == s2.cls.h);
      CHECK(s1.cls.t == s2.cls.t);
    }
  }
}
