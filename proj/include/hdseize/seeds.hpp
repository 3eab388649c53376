/*
 * Copyright 2026 The hdseize authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace hdseize {

/// splitmix64 finalizer. Stateless bit mixer with full 64-bit avalanche.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sub-seed derivation. One master seed reproduces an entire experiment:
/// every consumer (channel memory, level memory, synthetic data, interictal
/// placement, ...) derives its own stream as
///
///   sub = mix64(mix64(mix64(master + PHI) ^ fnv1a64(purpose)) ^ (index + K))
///
/// with PHI = 0x9e3779b97f4a7c15 and K = 0x2545f4914f6cdd1d. The derivation
/// is pure integer arithmetic and therefore identical on every platform.
inline uint64_t derive_seed(uint64_t master, std::string_view purpose,
                            uint64_t index = 0) {
  uint64_t z = mix64(master + 0x9e3779b97f4a7c15ULL);
  z = mix64(z ^ fnv1a64(purpose));
  z = mix64(z ^ (index + 0x2545f4914f6cdd1dULL));
  return z;
}

/// Deterministic RNG wrapper. Uses the standard-pinned mt19937_64 engine and
/// avoids std distributions, whose output is implementation-defined; the
/// uniform/bounded draws below are fully specified so that identical seeds
/// yield identical streams on every platform.
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next() { return eng_(); }

  /// Uniform in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Modulo bias is below 2^-50 for the n used
  /// here (n <= a few thousand).
  uint64_t below(uint64_t n) { return next() % n; }

  /// Standard normal via Box-Muller.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace hdseize
