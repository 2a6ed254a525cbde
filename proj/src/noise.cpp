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

#include "dptopk/noise.hpp"

#include <algorithm>
#include <stdexcept>

namespace dptopk {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Exponential:
      return "exponential";
    case NoiseKind::Gumbel:
      return "gumbel";
    case NoiseKind::Laplace:
      return "laplace";
    case NoiseKind::Logistic:
      return "logistic";
    case NoiseKind::HalfLogistic:
      return "half-logistic";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "exponential") return NoiseKind::Exponential;
  if (name == "gumbel") return NoiseKind::Gumbel;
  if (name == "laplace") return NoiseKind::Laplace;
  if (name == "logistic") return NoiseKind::Logistic;
  if (name == "half-logistic" || name == "halflogistic")
    return NoiseKind::HalfLogistic;
  throw std::invalid_argument("unknown noise kind: " + name);
}

double inv_cdf(NoiseKind kind, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("inv_cdf: p must lie in (0, 1)");
  }
  switch (kind) {
    case NoiseKind::Exponential:
      return -std::log1p(-p);
    case NoiseKind::Gumbel:
      return -std::log(-std::log(p));
    case NoiseKind::Laplace:
      // Increasing form of the double-exponential quantile. The mirrored
      // (decreasing) form produces the same distribution but breaks the
      // order-statistics trick, which needs a monotone quantile.
      return (p >= 0.5) ? -(detail::kLn2 + std::log1p(-p))
                        : std::log(2.0 * p);
    case NoiseKind::Logistic:
      return std::log(p) - std::log1p(-p);
    case NoiseKind::HalfLogistic:
      return std::log1p(p) - std::log1p(-p);
  }
  throw std::invalid_argument("inv_cdf: unknown noise kind");
}

double group_max_noise(NoiseKind kind, const LogUniform& lu) {
  if (!(lu.log_u < 0.0)) {
    throw std::invalid_argument("group_max_noise: log_u must be negative");
  }
  if (!(lu.log_group_size >= 0.0)) {
    throw std::invalid_argument(
        "group_max_noise: log_group_size must be nonnegative");
  }
  return detail::quantile_log_uniform(kind, lu.log_u, lu.log_group_size);
}

std::vector<double> top_order_noise(NoiseKind kind, long group_size, int kappa,
                                    Rng& rng) {
  if (group_size < 1) {
    throw std::invalid_argument("top_order_noise: group_size must be >= 1");
  }
  if (kappa < 1 || kappa > group_size) {
    throw std::invalid_argument(
        "top_order_noise: kappa must lie in [1, group_size]");
  }
  std::vector<double> out(static_cast<size_t>(kappa));
  double log_p = 0.0;
  for (int i = 0; i < kappa; ++i) {
    log_p += rng.log_uniform() / static_cast<double>(group_size - i);
    out[static_cast<size_t>(i)] =
        detail::quantile_log_uniform(kind, log_p, 0.0);
  }
  return out;
}

double log_survival(NoiseKind kind, double x) {
  switch (kind) {
    case NoiseKind::Exponential:
      return (x <= 0.0) ? 0.0 : -x;
    case NoiseKind::Gumbel:
      return std::log(-std::expm1(-std::exp(-x)));
    case NoiseKind::Laplace:
      return (x >= 0.0) ? -x - detail::kLn2 : std::log1p(-0.5 * std::exp(x));
    case NoiseKind::Logistic:
      return (x >= 0.0) ? -x - std::log1p(std::exp(-x))
                        : -std::log1p(std::exp(x));
    case NoiseKind::HalfLogistic:
      return (x <= 0.0) ? 0.0
                        : detail::kLn2 - x - std::log1p(std::exp(-x));
  }
  throw std::invalid_argument("log_survival: unknown noise kind");
}

double verify_lipschitz(NoiseKind kind, const std::vector<double>& x_grid,
                        const std::vector<double>& c_grid) {
  double worst = 0.0;
  for (double x : x_grid) {
    const double at_x = log_survival(kind, x);
    if (!std::isfinite(at_x)) continue;
    for (double c : c_grid) {
      const double at_xc = log_survival(kind, x + c);
      if (!std::isfinite(at_xc)) continue;
      worst = std::max(worst, std::fabs(at_x - at_xc) - std::fabs(c));
    }
  }
  return worst;
}

}  // namespace dptopk
