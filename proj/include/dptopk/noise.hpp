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

#ifndef DPTOPK_NOISE_HPP_
#define DPTOPK_NOISE_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "dptopk/rng.hpp"

namespace dptopk {

// Standard noise distributions whose log-survival function
// log(1 - F(x)) is 1-Lipschitz. Only quantile (inverse-transform) paths
// are exposed; that is all the selection mechanisms need.
enum class NoiseKind { Exponential, Gumbel, Laplace, Logistic, HalfLogistic };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& name);

// The maximum of exp(m) i.i.d. uniforms, held as p = exp(log_u * exp(-m))
// without ever materializing p. log_u is the log of a single uniform draw
// (< 0) and log_group_size is m >= 0. Group sizes reach log-magnitudes of
// 10^3..10^4 for realistic inputs, so p is often 1 - (denormal).
struct LogUniform {
  double log_u;
  double log_group_size;
};

namespace detail {

// Branch point for |log p|: below this, 1 - p is computed from the series
// 1 - e^z = (-z)(1 + z/2 + z^2/6 + ...) instead of expm1, which keeps the
// result finite even when z itself underflows to -0.
inline constexpr double kTinyLogP = -18.420680743952367;  // log(1e-8)
inline constexpr double kLn2 = 0.6931471805599453;

// log(1 - exp(z)) for z < 0, where log_abs_z = log|z| is supplied
// separately so the huge-group case (z underflowed) still works.
inline double log1m_exp(double z, double log_abs_z) {
  if (log_abs_z > kTinyLogP) {
    return std::log(-std::expm1(z));
  }
  return log_abs_z + std::log1p(z * (0.5 + z * (1.0 / 6.0)));
}

// Quantile of `kind` at p = exp(log_u * exp(-m)), the group maximum of
// exp(m) uniforms. All quantiles are the proper increasing ones.
inline double quantile_log_uniform(NoiseKind kind, double log_u, double m) {
  const double log_abs_logp = std::log(-log_u) - m;
  if (kind == NoiseKind::Gumbel) {
    // -log(-log p) = m - log(-log_u) exactly; the Gumbel shift identity.
    return -log_abs_logp;
  }
  // z = log p. In the non-tiny branch m is small enough that exp(-m) and
  // the product cannot underflow, and the product form is exact at m = 0.
  const double z = (log_abs_logp > kTinyLogP) ? log_u * std::exp(-m)
                                              : -std::exp(log_abs_logp);
  const double log1m = log1m_exp(z, log_abs_logp);
  switch (kind) {
    case NoiseKind::Exponential:
      return -log1m;
    case NoiseKind::Laplace:
      // p >= 1/2 <=> log p >= -log 2.
      return (z >= -kLn2) ? -(kLn2 + log1m) : kLn2 + z;
    case NoiseKind::Logistic:
      return z - log1m;
    case NoiseKind::HalfLogistic:
      return std::log1p(std::exp(z)) - log1m;
    default:
      return -log_abs_logp;  // unreachable (Gumbel handled above)
  }
}

}  // namespace detail

// Strictly increasing quantile function of the standard distribution.
// Requires 0 < p < 1.
double inv_cdf(NoiseKind kind, double p);

// Quantile of the maximum of a group of exp(m) i.i.d. noise draws,
// evaluated from a single uniform (Section "group-max trick"). Stable for
// log group sizes up to at least 1e6.
double group_max_noise(NoiseKind kind, const LogUniform& lu);

// The kappa largest of group_size i.i.d. noise draws, largest first,
// generated top-down via the descending-record recursion
// U_(n) = V^(1/n), U_(n-1) = U_(n) * V'^(1/(n-1)), ... in log space.
std::vector<double> top_order_noise(NoiseKind kind, long group_size, int kappa,
                                    Rng& rng);

// Max over the grid of |log(1-F(x)) - log(1-F(x+c))| - |c|, clipped below
// at 0. Points where 1 - F underflows are skipped. Theory says 0 for all
// supported kinds; the numeric check should stay below 1e-9.
double verify_lipschitz(NoiseKind kind, const std::vector<double>& x_grid,
                        const std::vector<double>& c_grid);

// log(1 - F(x)) for the standard distribution of `kind`.
double log_survival(NoiseKind kind, double x);

}  // namespace dptopk

#endif  // DPTOPK_NOISE_HPP_
