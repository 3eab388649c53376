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

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "hdseize/error.hpp"

namespace hdseize {

enum class Taper : uint8_t { kHann = 0, kRectangular = 1 };

inline const char* to_string(Taper t) {
  return t == Taper::kHann ? "hann" : "rectangular";
}

/// Symmetric Hann window; w[n] = 0.5 - 0.5 cos(2 pi n / (S-1)).
inline double taper_weight(Taper taper, size_t n, size_t length) {
  if (taper == Taper::kRectangular || length < 2) return 1.0;
  return 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(n) /
                              static_cast<double>(length - 1));
}

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t half = len >> 1;
    std::vector<std::complex<double>> w(half);
    for (size_t k = 0; k < half; ++k)
      w[k] = std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) /
                                 static_cast<double>(len));
    for (size_t i = 0; i < n; i += len) {
      for (size_t k = 0; k < half; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + half] * w[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

/// Forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N). Radix-2 FFT when the
/// size is a power of two, direct O(N^2) evaluation otherwise (window sizes
/// in this library are powers of two in every standard configuration).
inline std::vector<std::complex<double>> fft(
    std::vector<std::complex<double>> a) {
  const size_t n = a.size();
  if (n == 0) return a;
  if (std::has_single_bit(n)) {
    fft_pow2(a);
    return a;
  }
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t)
      acc += a[t] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) *
                                        static_cast<double>(t) /
                                        static_cast<double>(n));
    out[k] = acc;
  }
  return out;
}

inline std::vector<std::complex<double>> ifft(
    std::vector<std::complex<double>> a) {
  for (auto& v : a) v = std::conj(v);
  a = fft(std::move(a));
  const double inv = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v = std::conj(v) * inv;
  return a;
}

/// Tapered forward transform of a real signal.
inline std::vector<std::complex<double>> spectrum(std::span<const double> x,
                                                  Taper taper) {
  std::vector<std::complex<double>> a(x.size());
  for (size_t n = 0; n < x.size(); ++n)
    a[n] = std::complex<double>(x[n] * taper_weight(taper, n, x.size()), 0.0);
  return fft(std::move(a));
}

/// One-sided, unscaled periodogram: power[k] = |X[k]|^2 for k = 0..S/2.
/// Every consumer here uses either normalized or relative power, so the
/// absolute scale is irrelevant as long as it is consistent.
struct Periodogram {
  std::vector<double> power; // k = 0 .. floor(S/2)
  double bin_hz = 0.0;

  double frequency(size_t k) const { return static_cast<double>(k) * bin_hz; }
  double total() const {
    double t = 0.0;
    for (double p : power) t += p;
    return t;
  }
};

inline Periodogram periodogram(std::span<const double> x, double fs,
                               Taper taper = Taper::kHann) {
  if (x.size() < 2) throw config_error("periodogram: need at least 2 samples");
  const auto X = spectrum(x, taper);
  Periodogram pg;
  pg.bin_hz = fs / static_cast<double>(x.size());
  pg.power.resize(x.size() / 2 + 1);
  for (size_t k = 0; k < pg.power.size(); ++k) pg.power[k] = std::norm(X[k]);
  return pg;
}

/// Zero-phase band filter via spectral masking: keep bins with
/// lo_hz <= |f| < hi_hz, inverse transform, return the real part.
inline std::vector<double> bandpass_filter(std::span<const double> x, double fs,
                                           double lo_hz, double hi_hz) {
  const size_t n = x.size();
  std::vector<std::complex<double>> a(n);
  for (size_t i = 0; i < n; ++i) a[i] = std::complex<double>(x[i], 0.0);
  a = fft(std::move(a));
  for (size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(k <= n / 2 ? k : n - k) * fs /
                     static_cast<double>(n);
    if (f < lo_hz || f >= hi_hz) a[k] = std::complex<double>(0.0, 0.0);
  }
  a = ifft(std::move(a));
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = a[i].real();
  return out;
}

} // namespace hdseize
