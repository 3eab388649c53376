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

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "hdseize/features.hpp"
#include "hdseize/seeds.hpp"
#include "oracles.hpp"

using namespace hdseize;

namespace {

std::vector<double> sine(double hz, double fs, size_t n, double amp = 1.0,
                         double phase = 0.0) {
  std::vector<double> x(n);
  for (size_t t = 0; t < n; ++t)
    x[t] = amp * std::sin(2.0 * M_PI * hz * static_cast<double>(t) / fs + phase);
  return x;
}

std::vector<double> white_noise(size_t n, uint64_t seed, double std_dev = 1.0) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = std_dev * rng.gaussian();
  return x;
}

bool close_rel(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

// ---------------------------------------------------------------------------
// Local binary patterns
// ---------------------------------------------------------------------------

TEST_CASE("lbp codes on monotone ramps") {
  std::vector<double> up(32), down(32);
  for (size_t i = 0; i < 32; ++i) {
    up[i] = static_cast<double>(i);
    down[i] = -static_cast<double>(i);
  }
  for (uint8_t c : lbp_codes(up)) CHECK(c == 63);
  for (uint8_t c : lbp_codes(down)) CHECK(c == 0);
  CHECK(lbp_codes(up).size() == 32 - 6);
}

TEST_CASE("lbp codes on an alternating signal") {
  // up, down, up, down ... starting with up.
  std::vector<double> x(20);
  for (size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 0.0 : 1.0;
  const auto codes = lbp_codes(x);
  for (size_t t = 0; t < codes.size(); ++t)
    CHECK(codes[t] == (t % 2 == 0 ? 42 : 21)); // 0b101010 and 0b010101
}

TEST_CASE("lbp codes match the definitional oracle on all 64 templates") {
  for (uint32_t pattern = 0; pattern < 64; ++pattern) {
    // Realize the 6 transitions of `pattern` (MSB first) as a 7-sample signal.
    std::vector<double> x(7, 0.0);
    for (uint32_t k = 0; k < 6; ++k) {
      const bool up = (pattern >> (5 - k)) & 1u;
      x[k + 1] = x[k] + (up ? 1.0 : -1.0);
    }
    const auto codes = lbp_codes(x);
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == pattern);
    CHECK(codes[0] == oracle::lbp_code_at(x, 0));
  }
}

TEST_CASE("lbp rejects short input") {
  std::vector<double> x(6, 0.0);
  CHECK_THROWS_AS(lbp_codes(x), config_error);
}

// ---------------------------------------------------------------------------
// Amplitude
// ---------------------------------------------------------------------------

TEST_CASE("normalize_amplitude maps the range onto [0,1]") {
  const ValueRange r{-10.0, 10.0};
  const std::vector<double> x{-10.0, 0.0, 10.0, -50.0, 50.0};
  const auto y = normalize_amplitude(x, r);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == doctest::Approx(0.5));
  CHECK(y[2] == 1.0);
  CHECK(y[3] == 0.0); // clamped
  CHECK(y[4] == 1.0); // clamped
  CHECK_THROWS_AS(normalize_amplitude(x, ValueRange{1.0, 1.0}), config_error);
}

TEST_CASE("mean_amplitude") {
  SUBCASE("zeros and constants are zero") {
    CHECK(mean_amplitude(std::vector<double>(64, 0.0)) == 0.0);
    CHECK(mean_amplitude(std::vector<double>(64, 0.7)) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("unit square wave around 0.5 gives 0.5") {
    std::vector<double> x(64);
    for (size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 0.0 : 1.0;
    CHECK(mean_amplitude(x) == doctest::Approx(0.5));
  }
}

// ---------------------------------------------------------------------------
// Spectral entropy
// ---------------------------------------------------------------------------

TEST_CASE("spectral entropy endpoints") {
  SUBCASE("impulse has a flat spectrum, entropy exactly 1") {
    std::vector<double> x(256, 0.0);
    x[100] = 1.0;
    CHECK(spectral_entropy(x, 256.0, Taper::kHann) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_entropy(x, 256.0, Taper::kRectangular) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("bin-centered sine is a delta spectrum, entropy ~ 0") {
    const auto x = sine(8.0, 256.0, 256); // bin 8 exactly
    CHECK(spectral_entropy(x, 256.0, Taper::kRectangular) < 1e-9);
  }
  SUBCASE("two equal bins give log2(2)/log2(bins)") {
    auto x = sine(8.0, 256.0, 256);
    const auto y = sine(32.0, 256.0, 256);
    for (size_t i = 0; i < x.size(); ++i) x[i] += y[i];
    const double expected = std::log2(2.0) / std::log2(129.0);
    CHECK(spectral_entropy(x, 256.0, Taper::kRectangular) ==
          doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("zero window is defined as 0") {
    CHECK(spectral_entropy(std::vector<double>(128, 0.0), 256.0) == 0.0);
  }
}

TEST_CASE("spectral entropy matches the direct-transform oracle") {
  for (const size_t n : {64u, 128u, 256u}) {
    for (uint64_t seed = 0; seed < 4; ++seed) {
      const auto x = white_noise(n, derive_seed(11, "se", seed));
      for (const Taper taper : {Taper::kHann, Taper::kRectangular}) {
        const auto power = oracle::direct_power_spectrum(x, taper == Taper::kHann);
        CHECK(close_rel(spectral_entropy(x, 256.0, taper),
                        oracle::spectral_entropy_of(power)));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Band powers
// ---------------------------------------------------------------------------

TEST_CASE("band powers concentrate where the sine lives") {
  const size_t n = 1024;
  SUBCASE("6 Hz is theta") {
    const auto bands = band_relative_powers(sine(6.0, 256.0, n), 256.0);
    CHECK(bands[1] > 0.99); // theta
    CHECK(bands[0] + bands[2] + bands[3] + bands[4] + bands[5] < 0.01);
  }
  SUBCASE("2 Hz is delta") {
    const auto bands = band_relative_powers(sine(2.0, 256.0, n), 256.0);
    CHECK(bands[0] > 0.99);
  }
  SUBCASE("zero signal gives six zeros") {
    const auto bands = band_relative_powers(std::vector<double>(n, 0.0), 256.0);
    for (double b : bands) CHECK(b == 0.0);
  }
  SUBCASE("low sampling rates are rejected") {
    CHECK_THROWS_AS(band_relative_powers(sine(2.0, 64.0, 256), 64.0),
                    config_error);
  }
}

TEST_CASE("band powers match the direct-transform oracle") {
  for (const size_t n : {128u, 256u}) {
    for (uint64_t seed = 0; seed < 4; ++seed) {
      const auto x = white_noise(n, derive_seed(12, "bp", seed));
      const auto got = band_relative_powers(x, 256.0, Taper::kHann);
      const auto power = oracle::direct_power_spectrum(x, true);
      const auto want = oracle::band_powers_of(power, 256.0 / static_cast<double>(n));
      for (int b = 0; b < 6; ++b) CHECK(close_rel(got[b], want[b]));
    }
  }
}

// ---------------------------------------------------------------------------
// Wavelet-style peak band
// ---------------------------------------------------------------------------

TEST_CASE("cwt peak band finds the dominant frequency") {
  const double spacing = (kCwtHiHz - kCwtLoHz) / (kCwtBands - 1);
  SUBCASE("5 Hz sine lands in the band whose center is nearest 5 Hz") {
    uint32_t nearest = 0;
    for (uint32_t b = 1; b < kCwtBands; ++b)
      if (std::abs(kCwtLoHz + b * spacing - 5.0) <
          std::abs(kCwtLoHz + nearest * spacing - 5.0))
        nearest = b;
    CHECK(cwt_peak_band(sine(5.0, 256.0, 1024), 256.0) == nearest);
  }
  SUBCASE("slow drift lands in band 0") {
    CHECK(cwt_peak_band(sine(0.3, 256.0, 1024), 256.0) == 0);
  }
  SUBCASE("14.9 Hz lands in the top band") {
    CHECK(cwt_peak_band(sine(14.9, 256.0, 1024), 256.0) == kCwtBands - 1);
  }
}

// ---------------------------------------------------------------------------
// FFT bins
// ---------------------------------------------------------------------------

TEST_CASE("fft_bins aggregates groups of positive-frequency bins") {
  const size_t n = 1024;
  SUBCASE("S=1024, B=64 averages groups of 8") {
    const auto x = white_noise(n, 5);
    const auto bins = fft_bins(x, 256.0, 64, Taper::kRectangular);
    REQUIRE(bins.size() == 64);
    const auto power = oracle::direct_power_spectrum(x, false);
    for (size_t b = 0; b < 64; ++b) {
      double want = 0.0;
      for (size_t k = 1 + b * 8; k <= (b + 1) * 8; ++k)
        want += std::sqrt(power[k]);
      want /= 8.0;
      CHECK(close_rel(bins[b], want, 1e-9));
    }
  }
  SUBCASE("a sine inside one group dominates that output bin") {
    const auto bins = fft_bins(sine(9.0, 256.0, n), 256.0, 64); // bin 36, group 4
    size_t best = 0;
    for (size_t b = 1; b < bins.size(); ++b)
      if (bins[b] > bins[best]) best = b;
    CHECK(best == 4);
    for (size_t b = 0; b < bins.size(); ++b)
      if (b != best) CHECK(bins[best] > 5.0 * bins[b]);
  }
  SUBCASE("zero signal gives zero bins") {
    const auto bins = fft_bins(std::vector<double>(n, 0.0), 256.0, 64);
    for (double b : bins) CHECK(b == 0.0);
  }
  SUBCASE("divisibility is enforced") {
    CHECK_THROWS_AS(fft_bins(white_noise(n, 2), 256.0, 63), config_error);
  }
}

// ---------------------------------------------------------------------------
// Time-domain entropies
// ---------------------------------------------------------------------------

TEST_CASE("permutation entropy") {
  std::vector<double> ramp(128);
  for (size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  for (uint32_t order = 3; order <= 7; ++order)
    CHECK(permutation_entropy(ramp, order) == 0.0); // single ordinal pattern
  CHECK(permutation_entropy(std::vector<double>(128, 1.0), 3) == 0.0);
  CHECK(permutation_entropy(white_noise(512, 9), 3) > 0.5);
  CHECK_THROWS_AS(permutation_entropy(ramp, 9), config_error);
}

TEST_CASE("sample entropy") {
  CHECK(sample_entropy(std::vector<double>(64, 0.0)) == 0.0);
  const double regular = sample_entropy(sine(4.0, 256.0, 512));
  const double noisy = sample_entropy(white_noise(512, 10));
  CHECK(std::isfinite(regular));
  CHECK(std::isfinite(noisy));
  CHECK(regular < noisy);
}

TEST_CASE("renyi and tsallis entropies") {
  std::vector<double> impulse(256, 0.0);
  impulse[7] = 1.0; // flat spectrum
  const auto pg = periodogram(impulse, 256.0, Taper::kRectangular);
  for (double a : {2.0, 3.0, 6.0})
    CHECK(renyi_entropy_from(pg, a) == doctest::Approx(1.0).epsilon(1e-9));
  for (double q : {2.0, 3.0, 6.0})
    CHECK(tsallis_entropy_from(pg, q) == doctest::Approx(1.0).epsilon(1e-9));

  const auto zero = periodogram(std::vector<double>(256, 0.0), 256.0);
  CHECK(renyi_entropy_from(zero, 2.0) == 0.0);
  CHECK(tsallis_entropy_from(zero, 2.0) == 0.0);
  CHECK_THROWS_AS(renyi_entropy_from(pg, 1.0), config_error);
  CHECK_THROWS_AS(tsallis_entropy_from(pg, 1.0), config_error);

  // A concentrated spectrum has lower entropy than a flat one.
  const auto peaked = periodogram(sine(8.0, 256.0, 256), 256.0, Taper::kRectangular);
  CHECK(renyi_entropy_from(peaked, 2.0) < 0.1);
  CHECK(tsallis_entropy_from(peaked, 2.0) < 1.0);
}

// ---------------------------------------------------------------------------
// Feature registry
// ---------------------------------------------------------------------------

TEST_CASE("default registries have the documented shapes") {
  const FeatureRegistry three = FeatureRegistry::three();
  CHECK(three.size() == 3);
  CHECK(three.at(2).fixed_range.has_value());

  const FeatureRegistry full = FeatureRegistry::default_45();
  REQUIRE(full.size() == 45);
  std::set<std::string> names;
  for (uint32_t i = 0; i < full.size(); ++i) names.insert(full.at(i).name);
  CHECK(names.size() == 45); // unique names

  // 37 entropy entries, 8 frequency-domain entries.
  uint32_t entropies = 0, frequency = 0;
  for (uint32_t i = 0; i < full.size(); ++i) {
    switch (full.at(i).kind) {
      case FeatureKind::kSampleEntropy:
      case FeatureKind::kPermutationEntropy:
      case FeatureKind::kSpectralEntropy:
      case FeatureKind::kRenyiEntropy:
      case FeatureKind::kTsallisEntropy: ++entropies; break;
      case FeatureKind::kBandPower:
      case FeatureKind::kTotalPower:
      case FeatureKind::kPeakFrequency: ++frequency; break;
      default: break;
    }
  }
  CHECK(entropies == 37);
  CHECK(frequency == 8);
}

TEST_CASE("45-feature evaluation on a zero window is all zeros") {
  const FeatureRegistry reg = FeatureRegistry::default_45();
  const std::vector<double> zeros(512, 0.0);
  const auto values = reg.evaluate(zeros, 256.0, FeatureContext{});
  REQUIRE(values.size() == 45);
  for (double v : values) CHECK(v == 0.0);
}

TEST_CASE("45-feature evaluation is finite on real-ish signals") {
  const FeatureRegistry reg = FeatureRegistry::default_45();
  auto x = white_noise(512, 33, 20.0);
  const auto s = sine(4.0, 256.0, 512, 80.0);
  for (size_t i = 0; i < x.size(); ++i) x[i] += s[i];
  const auto values =
      reg.evaluate(x, 256.0, FeatureContext{ValueRange{-150.0, 150.0}});
  REQUIRE(values.size() == 45);
  for (double v : values) CHECK(std::isfinite(v));
}

TEST_CASE("registry JSON round-trip") {
  const FeatureRegistry reg = FeatureRegistry::default_45();
  const FeatureRegistry back = FeatureRegistry::from_json(reg.to_json());
  REQUIRE(back.size() == reg.size());
  for (uint32_t i = 0; i < reg.size(); ++i) {
    CHECK(back.at(i).name == reg.at(i).name);
    CHECK(back.at(i).kind == reg.at(i).kind);
    CHECK(back.at(i).param == reg.at(i).param);
    CHECK(back.at(i).band == reg.at(i).band);
  }
  CHECK_THROWS_AS(FeatureRegistry::from_json(nlohmann::json::array()),
                  config_error);
}

TEST_CASE("features are invariant to a full-period shift") {
  const double fs = 256.0;
  const size_t n = 512;
  // 4 Hz: one period is exactly 64 samples.
  std::vector<double> a(n), b(n);
  for (size_t t = 0; t < n; ++t) {
    a[t] = std::sin(2.0 * M_PI * 4.0 * static_cast<double>(t) / fs);
    b[t] = std::sin(2.0 * M_PI * 4.0 * static_cast<double>(t + 64) / fs);
  }
  CHECK(close_rel(spectral_entropy(a, fs), spectral_entropy(b, fs)));
  CHECK(cwt_peak_band(a, fs) == cwt_peak_band(b, fs));
  const auto ba = band_relative_powers(a, fs);
  const auto bb = band_relative_powers(b, fs);
  for (int i = 0; i < 6; ++i) CHECK(close_rel(ba[i], bb[i]));
}
