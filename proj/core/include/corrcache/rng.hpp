/*
 * Copyright 2026 The corrcache Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CORRCACHE_RNG_HPP
#define CORRCACHE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace corrcache {

// 64-bit FNV-1a, used to derive named substreams from (seed, tag).
constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/**
 * SplitMix64 engine (Steele, Lea, Flood 2014). Tiny state, full 2^64
 * period, and splittable: independent streams are derived by scrambling
 * (seed ^ hash(tag)), so the same (seed, tag) pair reproduces the same
 * sequence on any platform. This is the generator behind the
 * "splitmix64-streams-v1" identifier recorded in result manifests.
 */
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound); bound must be nonzero.
  // Multiply-shift reduction (Lemire); the bias is < bound / 2^64.
  std::uint64_t below(std::uint64_t bound) {
    const unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
  }

  double exponential(double mean) {
    // next_unit() < 1, so log1p(-u) is finite.
    return -mean * std::log1p(-next_unit());
  }

  // Pareto type I: support [scale, inf), mean scale*shape/(shape-1).
  double pareto(double shape, double scale) {
    return scale * std::pow(1.0 - next_unit(), -1.0 / shape);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Independent named substream of a run seed. Streams with different tags
// never share state, so e.g. policy randomness cannot perturb the workload.
inline SplitMix64 named_stream(std::uint64_t seed, std::string_view tag) {
  SplitMix64 scramble(seed ^ fnv1a64(tag));
  // burn the scrambler once so nearby seeds decorrelate
  return SplitMix64(scramble.next_u64());
}

/**
 * Walker/Vose alias table for O(1) sampling from a fixed discrete
 * distribution. Construction is deterministic (indices processed in
 * ascending order), so samples are reproducible bit-for-bit.
 */
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);

  // Returns a 0-based index distributed according to the weights.
  std::int32_t sample(SplitMix64& rng) const {
    const auto k = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.next_unit() < prob_[k] ? static_cast<std::int32_t>(k)
                                      : alias_[k];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::int32_t> alias_;
};

}  // namespace corrcache

#endif  // CORRCACHE_RNG_HPP
