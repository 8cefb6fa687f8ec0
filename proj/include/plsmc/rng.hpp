// Copyright 2026 The plsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace plsmc {

namespace detail {

// 64-bit avalanche mix (splitmix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// Key derivation: fold an id into a key so that distinct ids give
// statistically unrelated child keys.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t id) {
  return mix64(key ^ mix64(id * kGolden + 0x1d8af066u));
}

}  // namespace detail

// Counter-based splittable random stream. A stream is a pure function of its
// key and an internal counter: identical (seed, replication, time_index) and
// substream path reproduce identical draw sequences bit-for-bit, regardless of
// how many draws any *other* stream has consumed. Filters hand each particle
// its own substream so per-particle parallelism cannot change results.
//
// Satisfies std::uniform_random_bit_generator; std::<random> distributions can
// be layered on top (construct them fresh per draw so no distribution state
// leaks across call sites).
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t replication = 0,
                     std::uint64_t time_index = 0)
      : key_(detail::derive_key(
            detail::derive_key(detail::mix64(seed ^ detail::kGolden), replication),
            time_index)) {}

  // Child stream keyed off this stream's key (not its counter position).
  [[nodiscard]] RngStream substream(std::uint64_t id) const {
    RngStream child(*this);
    child.key_ = detail::derive_key(key_, id);
    child.counter_ = 0;
    return child;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    counter_ += detail::kGolden;
    return detail::mix64(key_ ^ counter_);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Uniform draw on (0, 1).
inline double draw_uniform(RngStream& g) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return d(g);
}

// Normal draw; sd == 0 degenerates to the mean so that noiseless simulation
// configurations are representable.
inline double draw_normal(RngStream& g, double mean, double sd) {
  if (sd == 0.0) return mean;
  std::normal_distribution<double> d(mean, sd);
  return d(g);
}

// Gamma draw with shape/scale parameterization: E[x] = shape * scale.
inline double draw_gamma(RngStream& g, double shape, double scale) {
  std::gamma_distribution<double> d(shape, scale);
  return d(g);
}

// Inverse gamma IG(shape, scale) with density proportional to
// x^-(shape+1) exp(-scale/x), so E[x] = scale / (shape - 1).
inline double draw_inverse_gamma(RngStream& g, double shape, double scale) {
  return scale / draw_gamma(g, shape, 1.0);
}

// Beta draw via the two-gamma representation. Boundary counts give the
// degenerate draws a Beta limit would: Beta(a, 0) -> 1 and Beta(0, b) -> 0.
inline double draw_beta(RngStream& g, double a, double b) {
  if (b == 0.0) return 1.0;
  if (a == 0.0) return 0.0;
  const double x = draw_gamma(g, a, 1.0);
  const double y = draw_gamma(g, b, 1.0);
  return x / (x + y);
}

}  // namespace plsmc
