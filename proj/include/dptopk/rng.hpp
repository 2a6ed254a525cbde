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

#ifndef DPTOPK_RNG_HPP_
#define DPTOPK_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace dptopk {

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t rotl64(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

// Combines two 64-bit values into a well-mixed substream key.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return detail::splitmix64(s);
}

// Seeded xoshiro256++ stream. Every randomized operation in this library
// takes an explicit Rng so results are a pure function of (inputs, seed).
// Substreams are derived by hashing (key, index), which keeps parallel
// Monte Carlo runs reproducible independent of scheduling.
class Rng {
 public:
  explicit Rng(uint64_t seed) : key_(seed) {
    uint64_t sm = seed;
    for (auto& s : state_) s = detail::splitmix64(sm);
  }

  uint64_t key() const { return key_; }

  Rng substream(uint64_t index) const { return Rng(mix_seed(key_, index)); }

  uint64_t next_u64() {
    const uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // log of a uniform draw; strictly negative.
  double log_uniform() { return std::log(uniform_open()); }

  // Uniform integer in [0, bound). Multiplicative method; the bias of
  // roughly bound/2^64 is irrelevant at the bounds used here.
  int uniform_int(int bound) {
    return static_cast<int>(
        (static_cast<__uint128_t>(next_u64()) * static_cast<uint64_t>(bound)) >> 64);
  }

 private:
  uint64_t key_;
  uint64_t state_[4];
};

}  // namespace dptopk

#endif  // DPTOPK_RNG_HPP_
