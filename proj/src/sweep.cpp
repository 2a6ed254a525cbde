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

#include "dptopk/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "dptopk/canonical.hpp"
#include "dptopk/mechanisms.hpp"

namespace dptopk {

namespace {

using Clock = std::chrono::steady_clock;

long long elapsed_ns(Clock::time_point begin, Clock::time_point end) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(end - begin)
      .count();
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

bool is_canonical(Mechanism mech) {
  return mech == Mechanism::Canonical || mech == Mechanism::CanonicalG1;
}

double effective_gamma(const ExperimentSpec& spec) {
  return spec.mechanism == Mechanism::CanonicalG1 ? 1.0 : spec.gamma;
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.epsilons.empty()) {
    throw std::invalid_argument("experiment spec: need at least one epsilon");
  }
  for (double eps : spec.epsilons) {
    if (!(eps > 0.0)) {
      throw std::invalid_argument("experiment spec: epsilon must be positive");
    }
  }
  if (spec.trials < 1) {
    throw std::invalid_argument("experiment spec: trials must be >= 1");
  }
  const int d = spec.scores.dimension();
  const int max_k = is_canonical(spec.mechanism) ? d - 1 : d;
  if (spec.k < 1 || spec.k > max_k) {
    throw std::invalid_argument("experiment spec: k out of range for d");
  }
}

}  // namespace

std::string to_string(Mechanism mech) {
  switch (mech) {
    case Mechanism::Canonical:
      return "canonical";
    case Mechanism::CanonicalG1:
      return "canonical-g1";
    case Mechanism::Peeling:
      return "peeling";
    case Mechanism::Oneshot:
      return "oneshot";
    case Mechanism::Lipschitz:
      return "lipschitz";
  }
  return "unknown";
}

Mechanism parse_mechanism(const std::string& name) {
  if (name == "canonical") return Mechanism::Canonical;
  if (name == "canonical-g1") return Mechanism::CanonicalG1;
  if (name == "peeling") return Mechanism::Peeling;
  if (name == "oneshot") return Mechanism::Oneshot;
  if (name == "lipschitz") return Mechanism::Lipschitz;
  throw std::invalid_argument("unknown mechanism: " + name);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DPTOPK_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<int> run_mechanism_once(const ExperimentSpec& spec, double epsilon,
                                    Rng& rng) {
  std::vector<int> picked;
  switch (spec.mechanism) {
    case Mechanism::Canonical:
    case Mechanism::CanonicalG1:
      picked = canonical_select(spec.scores, spec.k, epsilon,
                                effective_gamma(spec), spec.noise, rng)
                   .items;
      return picked;  // already ascending
    case Mechanism::Peeling:
      picked = peel(spec.scores, spec.k, epsilon, 1.0, spec.noise, rng);
      break;
    case Mechanism::Oneshot:
      picked = oneshot(spec.scores, spec.k, epsilon, 1.0, spec.noise, rng);
      break;
    case Mechanism::Lipschitz: {
      MechanismParams params;
      params.epsilon = epsilon;
      params.delta_loss = 1.0;
      params.kappa = spec.k;
      params.noise = spec.noise;
      picked = lipschitz_select(spec.scores, params, rng);
      break;
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

namespace {

struct McCounts {
  std::vector<long> hits;      // per predicate
  long long mech_time_ns = 0;  // mechanism-only time, summed over trials
};

McCounts run_mc(const ExperimentSpec& spec, double epsilon,
                const std::vector<Predicate>& preds, const Rng& eps_rng,
                int threads) {
  const size_t np = preds.size();
  auto worker = [&](long begin, long end, McCounts& out) {
    out.hits.assign(np, 0);
    for (long trial = begin; trial < end; ++trial) {
      Rng trial_rng = eps_rng.substream(static_cast<uint64_t>(trial));
      Clock::time_point t0;
      if (spec.measure_time) t0 = Clock::now();
      const std::vector<int> picked =
          run_mechanism_once(spec, epsilon, trial_rng);
      if (spec.measure_time) out.mech_time_ns += elapsed_ns(t0, Clock::now());
      const UtilityClass cls = classify_subset(picked, spec.scores);
      for (size_t p = 0; p < np; ++p) {
        if (preds[p].matches(cls.h, cls.t)) ++out.hits[p];
      }
    }
  };

  if (threads <= 1 || spec.trials < 2 * threads) {
    McCounts total;
    worker(0, spec.trials, total);
    return total;
  }
  std::vector<McCounts> partial(static_cast<size_t>(threads));
  std::vector<std::thread> pool;
  const long chunk = (spec.trials + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const long begin = w * chunk;
    const long end = std::min(spec.trials, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(worker, begin, end,
                      std::ref(partial[static_cast<size_t>(w)]));
  }
  for (auto& th : pool) th.join();
  McCounts total;
  total.hits.assign(np, 0);
  for (const McCounts& part : partial) {
    if (part.hits.empty()) continue;
    for (size_t p = 0; p < np; ++p) total.hits[p] += part.hits[p];
    total.mech_time_ns += part.mech_time_ns;
  }
  return total;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentSpec& spec) {
  validate_spec(spec);
  const int threads = resolve_threads(spec.threads);
  const std::string mech_name = to_string(spec.mechanism);

  std::vector<Predicate> preds;
  for (Predicate::Variant variant : spec.predicates) {
    preds.push_back(Predicate{variant, spec.k});
  }

  std::vector<SweepRow> rows;
  for (size_t ei = 0; ei < spec.epsilons.size(); ++ei) {
    const double eps = spec.epsilons[ei];
    Rng eps_rng = Rng(spec.seed).substream(static_cast<uint64_t>(ei));

    const bool exact_ok = spec.exact && is_canonical(spec.mechanism) &&
                          spec.noise == NoiseKind::Gumbel;
    if (spec.exact && is_canonical(spec.mechanism) && !exact_ok) {
      rows.push_back(SweepRow{mech_name, eps,
                              "warning:exact-unsupported-mc-fallback", 0.0,
                              0.0, 0});
    }

    if (exact_ok) {
      const ClassDistribution dist = exact_class_distribution(
          spec.scores, spec.k, eps, effective_gamma(spec));
      long long wall_ns = 0;
      if (spec.measure_time) {
        Rng timing_rng = eps_rng.substream(0);
        const Clock::time_point t0 = Clock::now();
        run_mechanism_once(spec, eps, timing_rng);
        wall_ns = elapsed_ns(t0, Clock::now());
      }
      for (const Predicate& pred : preds) {
        rows.push_back(SweepRow{mech_name, eps, pred.name(),
                                predicate_probability(dist, pred), 0.0,
                                wall_ns});
      }
    } else {
      const McCounts counts = run_mc(spec, eps, preds, eps_rng, threads);
      const long long per_run =
          spec.measure_time ? counts.mech_time_ns / spec.trials : 0;
      for (size_t p = 0; p < preds.size(); ++p) {
        const double p_hat = static_cast<double>(counts.hits[p]) /
                             static_cast<double>(spec.trials);
        const double std_err = std::sqrt(p_hat * (1.0 - p_hat) /
                                         static_cast<double>(spec.trials));
        rows.push_back(
            SweepRow{mech_name, eps, preds[p].name(), p_hat, std_err, per_run});
      }
    }
  }

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.mechanism != b.mechanism) return a.mechanism < b.mechanism;
    if (a.epsilon != b.epsilon) return a.epsilon < b.epsilon;
    return a.predicate < b.predicate;
  });
  return rows;
}

BenchRow bench(const ExperimentSpec& spec) {
  validate_spec(spec);
  const double eps = spec.epsilons.front();
  const int runs = std::max(10, spec.bench_runs);

  Rng master(spec.seed);
  for (int warm = 0; warm < 2; ++warm) {
    Rng rng = master.substream(static_cast<uint64_t>(warm));
    run_mechanism_once(spec, eps, rng);
  }
  std::vector<long long> times;
  times.reserve(static_cast<size_t>(runs));
  for (int run = 0; run < runs; ++run) {
    Rng rng = master.substream(static_cast<uint64_t>(2 + run));
    const Clock::time_point t0 = Clock::now();
    run_mechanism_once(spec, eps, rng);
    times.push_back(elapsed_ns(t0, Clock::now()));
  }
  std::sort(times.begin(), times.end());
  const long long median = times[times.size() / 2];
  return BenchRow{to_string(spec.mechanism), spec.scores.dimension(), spec.k,
                  median, runs};
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "mechanism,epsilon,predicate,probability,std_err,wall_time_ns\n";
  for (const SweepRow& r : rows) {
    out += r.mechanism;
    out += ',';
    out += format_double(r.epsilon);
    out += ',';
    out += r.predicate;
    out += ',';
    out += format_double(r.probability);
    out += ',';
    out += format_double(r.std_err);
    out += ',';
    out += std::to_string(r.wall_time_ns);
    out += '\n';
  }
  return out;
}

std::string rows_to_json_lines(const std::vector<SweepRow>& rows) {
  std::string out;
  for (const SweepRow& r : rows) {
    nlohmann::json obj{{"mechanism", r.mechanism},
                       {"epsilon", r.epsilon},
                       {"predicate", r.predicate},
                       {"probability", r.probability},
                       {"std_err", r.std_err},
                       {"wall_time_ns", r.wall_time_ns}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string rows_to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "mechanism,d,k,median_ns,runs\n";
  for (const BenchRow& r : rows) {
    out += r.mechanism;
    out += ',';
    out += std::to_string(r.d);
    out += ',';
    out += std::to_string(r.k);
    out += ',';
    out += std::to_string(r.median_ns);
    out += ',';
    out += std::to_string(r.runs);
    out += '\n';
  }
  return out;
}

std::string rows_to_json_lines(const std::vector<BenchRow>& rows) {
  std::string out;
  for (const BenchRow& r : rows) {
    nlohmann::json obj{{"mechanism", r.mechanism},
                       {"d", r.d},
                       {"k", r.k},
                       {"median_ns", r.median_ns},
                       {"runs", r.runs}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

}  // namespace dptopk
