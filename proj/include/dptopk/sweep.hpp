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

#ifndef DPTOPK_SWEEP_HPP_
#define DPTOPK_SWEEP_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dptopk/analysis.hpp"
#include "dptopk/noise.hpp"
#include "dptopk/score_vector.hpp"

namespace dptopk {

enum class Mechanism { Canonical, CanonicalG1, Peeling, Oneshot, Lipschitz };

std::string to_string(Mechanism mech);
Mechanism parse_mechanism(const std::string& name);

// One experiment: a score vector, a mechanism, and the grid to sweep.
struct ExperimentSpec {
  ScoreVector scores;
  Mechanism mechanism = Mechanism::Canonical;
  int k = 1;
  double gamma = 0.5;              // used by Mechanism::Canonical
  NoiseKind noise = NoiseKind::Gumbel;
  std::vector<double> epsilons;
  long trials = 10000;             // Monte Carlo trials per epsilon
  uint64_t seed = 0;
  std::vector<Predicate::Variant> predicates = {
      Predicate::Variant::Top, Predicate::Variant::Great,
      Predicate::Variant::Good};
  bool exact = true;               // exact probabilities where supported
  int bench_runs = 10;
  // Wall-clock timings are inherently nondeterministic; disabling them
  // makes the output table a pure function of the spec.
  bool measure_time = true;
  int threads = 0;                 // 0: DPTOPK_THREADS env or hardware
};

struct SweepRow {
  std::string mechanism;
  double epsilon;
  std::string predicate;
  double probability;
  double std_err;
  long long wall_time_ns;
};

// One row per (epsilon, predicate), sorted by (mechanism, epsilon,
// predicate). Canonical mechanisms with Gumbel noise get exact
// probabilities (std_err 0); everything else is estimated from
// spec.trials runs. Requesting exact mode where unsupported falls back to
// Monte Carlo and prepends a warning row for that epsilon. Timings cover
// mechanism time only; the initial sort is excluded.
std::vector<SweepRow> run_sweep(const ExperimentSpec& spec);

struct BenchRow {
  std::string mechanism;
  int d;
  int k;
  long long median_ns;
  int runs;
};

// Median of >= 10 timed mechanism runs after 2 warmups, on pre-sorted
// scores, single-threaded.
BenchRow bench(const ExperimentSpec& spec);

// Runs the mechanism once and returns the selected subset (ascending item
// indices). Shared by the sweep, the benchmark, and the CLI.
std::vector<int> run_mechanism_once(const ExperimentSpec& spec, double epsilon,
                                    Rng& rng);

std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::string rows_to_json_lines(const std::vector<SweepRow>& rows);
std::string rows_to_csv(const std::vector<BenchRow>& rows);
std::string rows_to_json_lines(const std::vector<BenchRow>& rows);

// Worker-pool width: explicit spec value, else the DPTOPK_THREADS
// environment variable, else hardware parallelism.
int resolve_threads(int requested);

}  // namespace dptopk

#endif  // DPTOPK_SWEEP_HPP_
