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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dptopk/analysis.hpp"
#include "dptopk/canonical.hpp"
#include "dptopk/data.hpp"
#include "dptopk/mechanisms.hpp"
#include "dptopk/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsageError = 2;

struct InputOptions {
  std::string input;
  std::string format = "lines";
  int zipf_d = 0;
  double zipf_s = 1.0;
  double zipf_scale = 1.5e8;
  double delta_down = 1.0;
  double delta_up = 1.0;
};

void add_input_flags(CLI::App* cmd, InputOptions* in) {
  cmd->add_option("--input", in->input, "score file path");
  cmd->add_option("--format", in->format,
                  "input format: 'lines' or 'csv:<column>'");
  cmd->add_option("--zipf-d", in->zipf_d,
                  "generate Zipf scores with this many items instead of "
                  "reading a file");
  cmd->add_option("--zipf-s", in->zipf_s, "Zipf exponent (default 1)");
  cmd->add_option("--zipf-scale", in->zipf_scale,
                  "Zipf total mass (default 1.5e8)");
  cmd->add_option("--delta-minus", in->delta_down,
                  "per-user downward score sensitivity (default 1)");
  cmd->add_option("--delta-plus", in->delta_up,
                  "per-user upward score sensitivity (default 1)");
}

dptopk::ScoreVector load_input(const InputOptions& in) {
  if (!in.input.empty()) {
    return dptopk::load_scores(in.input, in.format, in.delta_down, in.delta_up);
  }
  if (in.zipf_d > 0) {
    dptopk::ScoreVector scores =
        dptopk::gen_zipf(in.zipf_d, in.zipf_s, in.zipf_scale);
    const double sens =
        dptopk::effective_sensitivity(in.delta_down, in.delta_up);
    if (sens != 1.0) {
      std::vector<double> raw = scores.raw();
      for (double& v : raw) v /= sens;
      scores = dptopk::ScoreVector(std::move(raw));
    }
    return scores;
  }
  throw dptopk::DataError("no input: pass --input or --zipf-d");
}

void write_output(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(path);
  if (!out) throw dptopk::DataError("cannot write '" + path + "'");
  out << payload;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private top-k selection"};
  app.require_subcommand(1);

  // ---- gen-zipf ----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-zipf", "write Zipf-law scores, one per line");
  int gen_d = 10000;
  double gen_s = 1.0;
  double gen_scale = 1.5e8;
  std::string gen_output;
  gen->add_option("--d", gen_d, "number of items (default 10000)");
  gen->add_option("--s", gen_s, "Zipf exponent (default 1)");
  gen->add_option("--scale", gen_scale, "total mass (default 1.5e8)");
  gen->add_option("--output", gen_output, "output file (default stdout)");

  // ---- shared mechanism flags -------------------------------------------
  InputOptions sample_in, probs_in, sweep_in, bench_in;
  std::string mechanism = "canonical";
  std::string noise = "gumbel";
  int k = 1;
  double gamma = 0.5;
  std::vector<double> epsilons;
  long trials = 10000;
  uint64_t seed = 0;
  bool json = false;
  bool exact = true;
  std::string output;
  int bench_runs = 10;

  auto add_mech_flags = [&](CLI::App* cmd, InputOptions* in) {
    add_input_flags(cmd, in);
    cmd->add_option("--mechanism", mechanism,
                    "canonical | canonical-g1 | peeling | oneshot | lipschitz");
    cmd->add_option("--noise", noise,
                    "exponential | gumbel | laplace | logistic | half-logistic");
    cmd->add_option("--k", k, "subset size")->required();
    cmd->add_option("--gamma", gamma, "canonical loss tradeoff in [0, 1]");
    cmd->add_option("--epsilon", epsilons, "privacy loss (repeatable)")
        ->required();
    cmd->add_option("--seed", seed, "master RNG seed");
    cmd->add_flag("--json", json, "emit JSON lines instead of CSV");
    cmd->add_option("--output", output, "output file (default stdout)");
  };

  auto* sample = app.add_subcommand("sample", "draw one private subset");
  add_mech_flags(sample, &sample_in);

  auto* probs = app.add_subcommand(
      "probs", "exact class distribution of the canonical mechanism (Gumbel)");
  add_mech_flags(probs, &probs_in);

  auto* sweep = app.add_subcommand("sweep", "predicate probabilities over epsilons");
  add_mech_flags(sweep, &sweep_in);
  sweep->add_option("--trials", trials, "Monte Carlo trials per epsilon");
  sweep->add_flag("--exact,!--mc", exact,
                  "exact probabilities where supported (default) / force MC");

  auto* bench_cmd = app.add_subcommand("bench", "median mechanism runtime");
  add_mech_flags(bench_cmd, &bench_in);
  bench_cmd->add_option("--runs", bench_runs, "timed runs (min 10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (gen->parsed()) {
      const dptopk::ScoreVector scores = dptopk::gen_zipf(gen_d, gen_s, gen_scale);
      std::string payload;
      char line[64];
      for (double v : scores.raw()) {
        std::snprintf(line, sizeof(line), "%.17g\n", v);
        payload += line;
      }
      write_output(gen_output, payload);
      return kExitOk;
    }

    dptopk::ExperimentSpec spec;
    spec.mechanism = dptopk::parse_mechanism(mechanism);
    spec.noise = dptopk::parse_noise_kind(noise);
    spec.k = k;
    spec.gamma = gamma;
    spec.epsilons = epsilons;
    spec.trials = trials;
    spec.seed = seed;
    spec.exact = exact;
    spec.bench_runs = bench_runs;

    if (sample->parsed()) {
      spec.scores = load_input(sample_in);
      dptopk::Rng rng(seed);
      std::vector<int> picked =
          dptopk::run_mechanism_once(spec, epsilons.front(), rng);
      const dptopk::UtilityClass cls =
          dptopk::classify_subset(picked, spec.scores);
      const double gamma_eff =
          spec.mechanism == dptopk::Mechanism::CanonicalG1 ? 1.0 : gamma;
      nlohmann::json obj;
      std::vector<int> one_based;
      for (int idx : picked) one_based.push_back(idx + 1);
      obj["items"] = one_based;
      obj["h"] = cls.h;
      obj["t"] = cls.t;
      obj["loss"] = dptopk::class_loss(cls.h, cls.t, gamma_eff, spec.scores);
      write_output(output, obj.dump() + "\n");
      return kExitOk;
    }

    if (probs->parsed()) {
      if (spec.noise != dptopk::NoiseKind::Gumbel) {
        std::cerr << "probs: exact distributions exist only for Gumbel noise\n";
        return kExitUsageError;
      }
      spec.scores = load_input(probs_in);
      const double gamma_eff =
          spec.mechanism == dptopk::Mechanism::CanonicalG1 ? 1.0 : gamma;
      const dptopk::ClassDistribution dist = dptopk::exact_class_distribution(
          spec.scores, k, epsilons.front(), gamma_eff);
      std::string payload;
      if (!json) payload = "h,t,probability\n";
      char line[96];
      for (size_t i = 0; i < dist.num_classes(); ++i) {
        const auto [h, t] = dist.class_at(i);
        const double p = std::exp(dist.log_prob_at(i));
        if (json) {
          nlohmann::json obj{{"h", h}, {"t", t}, {"probability", p}};
          payload += obj.dump();
          payload += '\n';
        } else {
          std::snprintf(line, sizeof(line), "%d,%d,%.17g\n", h, t, p);
          payload += line;
        }
      }
      write_output(output, payload);
      return kExitOk;
    }

    if (sweep->parsed()) {
      spec.scores = load_input(sweep_in);
      const std::vector<dptopk::SweepRow> rows = dptopk::run_sweep(spec);
      write_output(output, json ? dptopk::rows_to_json_lines(rows)
                                : dptopk::rows_to_csv(rows));
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      spec.scores = load_input(bench_in);
      const std::vector<dptopk::BenchRow> rows = {dptopk::bench(spec)};
      write_output(output, json ? dptopk::rows_to_json_lines(rows)
                                : dptopk::rows_to_csv(rows));
      return kExitOk;
    }
  } catch (const dptopk::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsageError;
}
