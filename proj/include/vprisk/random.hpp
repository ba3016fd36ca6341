//
// Copyright 2026 The vprisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Deterministic random streams. Every stochastic operation in the library
// derives its generators from a 64-bit master seed through `derive_seed`, so
// results depend only on (seed, index) and never on scheduling.

#ifndef VPRISK_RANDOM_HPP_
#define VPRISK_RANDOM_HPP_

#include <cstdint>
#include <limits>
#include <span>

namespace vprisk {

// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream tags keep sub-seeds of different operations apart even when they
// share a master seed and index.
enum class SeedDomain : std::uint64_t {
  kAttackTrial = 0x6174746b,     // "attk"
  kAttackRun = 0x6174726e,       // "atrn"
  kResampleRun = 0x72736d70,     // "rsmp"
  kChannelRecord = 0x63686e6c,   // "chnl"
  kChannelSpeaker = 0x6368736b,  // "chsk"
};

// Sub-seed for item `index` of `domain`:
//   mix64(mix64(master ^ domain) + (index + 1) * golden_gamma)
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain,
                                    std::uint64_t index) noexcept {
  const std::uint64_t base = mix64(master ^ static_cast<std::uint64_t>(domain));
  return mix64(base + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

// SplitMix64 generator. Trivially cheap to seed, which matters when every
// Monte Carlo trial gets its own stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// Uniform integer in [0, n), n >= 1. Lemire's multiply-shift with rejection;
// unlike std::uniform_int_distribution the output is identical on every
// standard library.
template <class Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  __uint128_t m = static_cast<__uint128_t>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<__uint128_t>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

// Uniform double in [0, 1) with 53 random bits.
template <class Rng>
double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Draws an index from a probability vector by inverse CDF. Zero-probability
// entries are never returned.
template <class Rng>
std::size_t sample_categorical(Rng& rng, std::span<const double> probs) {
  const double u = uniform_unit(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // Rounding left u above the accumulated total.
  return last_positive;
}

}  // namespace vprisk

#endif  // VPRISK_RANDOM_HPP_
