// Copyright 2026 The metaloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METALOOP_AUTODIFF_RNG_HPP
#define METALOOP_AUTODIFF_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace metaloop {

/// Random source with platform-independent derived distributions. The
/// engine is mt19937_64; uniform/normal draws are computed here rather than
/// through <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of mantissa.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Rejection sampling, n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    has_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// A named, derivable random stream: (global seed, purpose tag, indices...).
/// Streams are values; deriving a child never advances the parent, so the
/// same key path always yields the same draws.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t seed, std::string_view purpose = {})
      : key_(splitmix64(splitmix64(seed) ^ hash_string(purpose))) {}

  RngStream child(std::uint64_t index) const {
    RngStream s;
    s.key_ = splitmix64(key_ ^ splitmix64(index + 0x51ed270b27f0a9c3ULL));
    return s;
  }

  RngStream child(std::string_view tag) const { return child(hash_string(tag)); }

  std::uint64_t key() const { return key_; }
  Rng engine() const { return Rng(key_); }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t key_ = 0x853c49e6748fea9bULL;
};

}  // namespace metaloop

#endif  // METALOOP_AUTODIFF_RNG_HPP
