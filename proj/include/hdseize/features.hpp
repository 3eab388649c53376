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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdseize/error.hpp"
#include "hdseize/item_memory.hpp"
#include "hdseize/spectrum.hpp"

namespace hdseize {

/// One analysis window: channels x S sample matrix plus ground truth.
struct WindowRecord {
  std::vector<std::vector<double>> samples; // channels x S, microvolts
  double fs = 256.0;
  uint8_t label = 0; // 1 = ictal
  double start_s = 0.0;

  uint32_t channels() const { return static_cast<uint32_t>(samples.size()); }
  uint32_t sample_count() const {
    return samples.empty() ? 0 : static_cast<uint32_t>(samples.front().size());
  }
};

// ---------------------------------------------------------------------------
// Local binary patterns
// ---------------------------------------------------------------------------

inline constexpr uint32_t kLbpBits = 6;
inline constexpr uint32_t kLbpCodeCount = 1u << kLbpBits; // 64

/// 6-bit trend codes: bit k (most significant = earliest transition) is set
/// iff x[t+k+1] > x[t+k]. Returns S-6 codes for S input samples.
inline std::vector<uint8_t> lbp_codes(std::span<const double> x) {
  if (x.size() < kLbpBits + 1)
    throw config_error("lbp_codes: need at least " +
                       std::to_string(kLbpBits + 1) + " samples, got " +
                       std::to_string(x.size()));
  std::vector<uint8_t> codes(x.size() - kLbpBits);
  for (size_t t = 0; t < codes.size(); ++t) {
    uint8_t code = 0;
    for (uint32_t k = 0; k < kLbpBits; ++k)
      if (x[t + k + 1] > x[t + k]) code |= static_cast<uint8_t>(1u << (kLbpBits - 1 - k));
    codes[t] = code;
  }
  return codes;
}

// ---------------------------------------------------------------------------
// Amplitude
// ---------------------------------------------------------------------------

/// Clamped affine map of each sample onto [0, 1].
inline std::vector<double> normalize_amplitude(std::span<const double> x,
                                               ValueRange range) {
  if (!(range.lo < range.hi))
    throw config_error("normalize_amplitude: degenerate range");
  const double scale = 1.0 / (range.hi - range.lo);
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double v = std::clamp(x[i], range.lo, range.hi);
    out[i] = (v - range.lo) * scale;
  }
  return out;
}

/// Mean absolute deviation of an already-normalized channel. The mean of a
/// mean-free signal is uninformative, so deviation around the window mean is
/// used as the amplitude summary.
inline double mean_amplitude(std::span<const double> normalized) {
  if (normalized.empty()) return 0.0;
  double mean = 0.0;
  for (double v : normalized) mean += v;
  mean /= static_cast<double>(normalized.size());
  double mad = 0.0;
  for (double v : normalized) mad += std::abs(v - mean);
  return mad / static_cast<double>(normalized.size());
}

// ---------------------------------------------------------------------------
// Spectral features (all defined on the one-sided periodogram)
// ---------------------------------------------------------------------------

/// Normalized Shannon spectral entropy in [0, 1]; zero-power input gives 0.
inline double spectral_entropy_from(const Periodogram& pg) {
  const double total = pg.total();
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double p : pg.power) {
    if (p <= 0.0) continue;
    const double q = p / total;
    h -= q * std::log2(q);
  }
  return h / std::log2(static_cast<double>(pg.power.size()));
}

inline double spectral_entropy(std::span<const double> x, double fs,
                               Taper taper = Taper::kHann) {
  return spectral_entropy_from(periodogram(x, fs, taper));
}

inline double renyi_entropy_from(const Periodogram& pg, double alpha) {
  if (alpha == 1.0) throw config_error("renyi entropy: alpha must differ from 1");
  const double total = pg.total();
  if (!(total > 0.0)) return 0.0;
  double s = 0.0;
  for (double p : pg.power)
    if (p > 0.0) s += std::pow(p / total, alpha);
  const double h = std::log2(s) / (1.0 - alpha);
  return h / std::log2(static_cast<double>(pg.power.size()));
}

/// Tsallis spectral entropy normalized by its maximum (uniform) value.
inline double tsallis_entropy_from(const Periodogram& pg, double q) {
  if (q == 1.0) throw config_error("tsallis entropy: q must differ from 1");
  const double total = pg.total();
  if (!(total > 0.0)) return 0.0;
  double s = 0.0;
  for (double p : pg.power)
    if (p > 0.0) s += std::pow(p / total, q);
  const double n = static_cast<double>(pg.power.size());
  const double value = (1.0 - s) / (q - 1.0);
  const double max_value = (1.0 - std::pow(n, 1.0 - q)) / (q - 1.0);
  return value / max_value;
}

// ---------------------------------------------------------------------------
// Brain-wave bands
// ---------------------------------------------------------------------------

struct BandDef {
  const char* name;
  double lo_hz;
  double hi_hz;
};

/// The five classical bands; the relative-power feature adds a sixth
/// low-frequency component [0, 0.5) Hz.
inline constexpr std::array<BandDef, 5> kBrainBands = {{
    {"delta", 0.5, 4.0},
    {"theta", 4.0, 8.0},
    {"alpha", 8.0, 12.0},
    {"beta", 12.0, 30.0},
    {"gamma", 30.0, 45.0},
}};

inline constexpr double kBandTotalHiHz = 45.0;

/// Relative power in {delta, theta, alpha, beta, gamma, low [0,0.5)}, each
/// divided by the total power in [0, 45] Hz. All zeros for a silent window.
inline std::array<double, 6> band_relative_powers_from(const Periodogram& pg) {
  std::array<double, 6> bands{};
  double total = 0.0;
  for (size_t k = 0; k < pg.power.size(); ++k) {
    const double f = pg.frequency(k);
    if (f > kBandTotalHiHz) break;
    total += pg.power[k];
    if (f < 0.5)
      bands[5] += pg.power[k];
    else
      for (size_t b = 0; b < kBrainBands.size(); ++b) {
        const bool in_band = b + 1 == kBrainBands.size()
                                 ? (f >= kBrainBands[b].lo_hz && f <= kBrainBands[b].hi_hz)
                                 : (f >= kBrainBands[b].lo_hz && f < kBrainBands[b].hi_hz);
        if (in_band) {
          bands[b] += pg.power[k];
          break;
        }
      }
  }
  if (total > 0.0)
    for (double& v : bands) v /= total;
  else
    bands.fill(0.0);
  return bands;
}

inline std::array<double, 6> band_relative_powers(std::span<const double> x,
                                                  double fs,
                                                  Taper taper = Taper::kHann) {
  if (fs < 90.0)
    throw config_error("band_relative_powers: sampling rate must be >= 90 Hz "
                       "so the gamma band lies below Nyquist");
  return band_relative_powers_from(periodogram(x, fs, taper));
}

inline double total_power_from(const Periodogram& pg) { return pg.total(); }

inline double peak_frequency_from(const Periodogram& pg) {
  size_t best = 0;
  for (size_t k = 1; k < pg.power.size(); ++k)
    if (pg.power[k] > pg.power[best]) best = k;
  return pg.frequency(best);
}

// ---------------------------------------------------------------------------
// Wavelet-style peak band
// ---------------------------------------------------------------------------

inline constexpr uint32_t kCwtBands = 20;
inline constexpr double kCwtLoHz = 0.25;
inline constexpr double kCwtHiHz = 15.0;

/// Energy of a constant-shape (Morlet-style) filterbank with 20 linearly
/// spaced centers over [0.25, 15] Hz, evaluated in the frequency domain
/// (Gaussian response applied to the periodogram; by Parseval this equals
/// the band energy of the corresponding time-domain filter outputs).
/// Returns the index of the most energetic band, ties to the lowest index.
inline uint32_t cwt_peak_band_from(const Periodogram& pg) {
  const double spacing = (kCwtHiHz - kCwtLoHz) / (kCwtBands - 1);
  const double sigma = spacing / 2.0;
  uint32_t best = 0;
  double best_energy = -1.0;
  for (uint32_t b = 0; b < kCwtBands; ++b) {
    const double center = kCwtLoHz + b * spacing;
    double energy = 0.0;
    for (size_t k = 0; k < pg.power.size(); ++k) {
      const double f = pg.frequency(k);
      if (f > kCwtHiHz + 6.0 * sigma) break;
      const double d = (f - center) / sigma;
      energy += pg.power[k] * std::exp(-0.5 * d * d);
    }
    if (energy > best_energy) {
      best_energy = energy;
      best = b;
    }
  }
  return best;
}

inline uint32_t cwt_peak_band(std::span<const double> x, double fs,
                              Taper taper = Taper::kHann) {
  return cwt_peak_band_from(periodogram(x, fs, taper));
}

// ---------------------------------------------------------------------------
// FFT bin aggregation
// ---------------------------------------------------------------------------

/// Magnitude spectrum over the positive-frequency bins k = 1..S/2, averaged
/// in equal consecutive groups down to `bins` values. `bins` must divide S/2.
inline std::vector<double> fft_bins(std::span<const double> x, double fs,
                                    uint32_t bins, Taper taper = Taper::kHann) {
  (void)fs;
  const size_t half = x.size() / 2;
  if (bins == 0 || half == 0 || half % bins != 0)
    throw config_error("fft_bins: bin count " + std::to_string(bins) +
                       " must divide the positive-frequency bin count " +
                       std::to_string(half));
  const auto X = spectrum(x, taper);
  const size_t group = half / bins;
  std::vector<double> out(bins, 0.0);
  for (uint32_t b = 0; b < bins; ++b) {
    double acc = 0.0;
    for (size_t k = 1 + b * group; k <= (b + 1) * group; ++k)
      acc += std::abs(X[k]);
    out[b] = acc / static_cast<double>(group);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time-domain entropies
// ---------------------------------------------------------------------------

/// Sample entropy with Chebyshev distance, template length m, tolerance
/// r = r_factor * std(x). Degenerate windows (no matches at either length)
/// return 0 so no NaN/inf escapes the feature boundary.
inline double sample_entropy(std::span<const double> x, uint32_t m = 2,
                             double r_factor = 0.2) {
  const size_t n = x.size();
  if (n < m + 2) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double r = r_factor * std::sqrt(var / static_cast<double>(n));
  const size_t templates = n - m; // positions with both m and m+1 windows
  uint64_t match_m = 0, match_m1 = 0;
  for (size_t i = 0; i + 1 < templates; ++i) {
    for (size_t j = i + 1; j < templates; ++j) {
      bool ok = true;
      for (uint32_t k = 0; k < m; ++k)
        if (std::abs(x[i + k] - x[j + k]) > r) {
          ok = false;
          break;
        }
      if (!ok) continue;
      ++match_m;
      if (std::abs(x[i + m] - x[j + m]) <= r) ++match_m1;
    }
  }
  if (match_m == 0 || match_m1 == 0) return 0.0;
  return -std::log(static_cast<double>(match_m1) /
                   static_cast<double>(match_m));
}

/// Normalized permutation entropy of ordinal patterns of the given order,
/// in [0, 1]. Ties are broken by sample position (stable ordering).
inline double permutation_entropy(std::span<const double> x, uint32_t order) {
  if (order < 2 || order > 8)
    throw config_error("permutation_entropy: order must be in [2, 8]");
  const size_t n = x.size();
  if (n < order) return 0.0;
  static constexpr std::array<uint32_t, 9> kFactorial = {1,    1,    2,   6,
                                                         24,   120,  720, 5040,
                                                         40320};
  std::vector<uint32_t> histogram(kFactorial[order], 0);
  const size_t windows = n - order + 1;
  for (size_t t = 0; t < windows; ++t) {
    uint32_t index = 0;
    for (uint32_t i = 0; i < order; ++i) {
      uint32_t rank = 0;
      for (uint32_t j = i + 1; j < order; ++j) {
        const bool smaller = x[t + j] < x[t + i];
        if (smaller) ++rank;
      }
      index = index * (order - i) + rank;
    }
    ++histogram[index];
  }
  double h = 0.0;
  for (uint32_t c : histogram) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(windows);
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(kFactorial[order]));
}

// ---------------------------------------------------------------------------
// Feature registry
// ---------------------------------------------------------------------------

enum class FeatureKind : uint8_t {
  kMeanAmplitude,
  kSpectralEntropy,
  kCwtPeakBand,
  kSampleEntropy,
  kPermutationEntropy,
  kRenyiEntropy,
  kTsallisEntropy,
  kBandPower,
  kTotalPower,
  kPeakFrequency,
};

inline const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::kMeanAmplitude: return "mean_amplitude";
    case FeatureKind::kSpectralEntropy: return "spectral_entropy";
    case FeatureKind::kCwtPeakBand: return "cwt_peak_band";
    case FeatureKind::kSampleEntropy: return "sample_entropy";
    case FeatureKind::kPermutationEntropy: return "permutation_entropy";
    case FeatureKind::kRenyiEntropy: return "renyi_entropy";
    case FeatureKind::kTsallisEntropy: return "tsallis_entropy";
    case FeatureKind::kBandPower: return "band_power";
    case FeatureKind::kTotalPower: return "total_power";
    case FeatureKind::kPeakFrequency: return "peak_frequency";
  }
  return "unknown";
}

inline FeatureKind feature_kind_from_string(const std::string& s) {
  for (auto k : {FeatureKind::kMeanAmplitude, FeatureKind::kSpectralEntropy,
                 FeatureKind::kCwtPeakBand, FeatureKind::kSampleEntropy,
                 FeatureKind::kPermutationEntropy, FeatureKind::kRenyiEntropy,
                 FeatureKind::kTsallisEntropy, FeatureKind::kBandPower,
                 FeatureKind::kTotalPower, FeatureKind::kPeakFrequency})
    if (s == to_string(k)) return k;
  throw config_error("unknown feature kind: " + s);
}

/// One named feature. `band` selects a band-filtered subsignal for the
/// entropy kinds (-1 = full band, 0..4 = delta..gamma) and the band index
/// for kBandPower (0..4 = delta..gamma, 5 = low frequency). `param` is the
/// permutation order or the Renyi/Tsallis exponent. Features whose value has
/// a fixed scale carry `fixed_range` so normalization does not need to
/// estimate one from data.
struct FeatureDef {
  std::string name;
  FeatureKind kind = FeatureKind::kMeanAmplitude;
  double param = 0.0;
  int band = -1;
  std::optional<ValueRange> fixed_range;
};

struct FeatureContext {
  ValueRange signal_range{0.0, 1.0};
  Taper taper = Taper::kHann;
};

/// Ordered, immutable list of feature definitions. The order is load-bearing:
/// indices select entries of the feature item memory.
class FeatureRegistry {
public:
  explicit FeatureRegistry(std::vector<FeatureDef> defs)
      : defs_(std::move(defs)) {
    if (defs_.empty()) throw config_error("feature registry: empty");
  }

  uint32_t size() const { return static_cast<uint32_t>(defs_.size()); }
  const FeatureDef& at(uint32_t i) const { return defs_.at(i); }
  const std::vector<FeatureDef>& defs() const { return defs_; }

  /// The three-feature set: amplitude, entropy, peak band.
  static FeatureRegistry three() {
    std::vector<FeatureDef> defs;
    defs.push_back({"mean_amplitude", FeatureKind::kMeanAmplitude, 0.0, -1, std::nullopt});
    defs.push_back({"spectral_entropy", FeatureKind::kSpectralEntropy, 0.0, -1, std::nullopt});
    defs.push_back({"cwt_peak_band", FeatureKind::kCwtPeakBand, 0.0, -1,
                    ValueRange{0.0, static_cast<double>(kCwtBands - 1)}});
    return FeatureRegistry(std::move(defs));
  }

  /// The default 45-feature set: 37 entropies (sample, permutation orders
  /// 3..7, Shannon, Renyi a=2..6, Tsallis q=2..6, plus sample/permutation/
  /// Renyi/Tsallis recomputed on the five band-filtered subsignals) and 8
  /// frequency-domain features (6 relative band powers, total power, peak
  /// frequency).
  static FeatureRegistry default_45() {
    std::vector<FeatureDef> defs;
    defs.push_back({"sample_entropy", FeatureKind::kSampleEntropy, 0.0, -1, std::nullopt});
    for (int o = 3; o <= 7; ++o)
      defs.push_back({"permutation_entropy_o" + std::to_string(o),
                      FeatureKind::kPermutationEntropy, static_cast<double>(o),
                      -1, std::nullopt});
    defs.push_back({"spectral_entropy", FeatureKind::kSpectralEntropy, 0.0, -1, std::nullopt});
    for (int a = 2; a <= 6; ++a)
      defs.push_back({"renyi_entropy_a" + std::to_string(a),
                      FeatureKind::kRenyiEntropy, static_cast<double>(a), -1,
                      std::nullopt});
    for (int q = 2; q <= 6; ++q)
      defs.push_back({"tsallis_entropy_q" + std::to_string(q),
                      FeatureKind::kTsallisEntropy, static_cast<double>(q), -1,
                      std::nullopt});
    for (int b = 0; b < 5; ++b)
      defs.push_back({std::string("sample_entropy_") + kBrainBands[b].name,
                      FeatureKind::kSampleEntropy, 0.0, b, std::nullopt});
    for (int b = 0; b < 5; ++b)
      defs.push_back({std::string("permutation_entropy_o3_") + kBrainBands[b].name,
                      FeatureKind::kPermutationEntropy, 3.0, b, std::nullopt});
    for (int b = 0; b < 5; ++b)
      defs.push_back({std::string("renyi_entropy_a2_") + kBrainBands[b].name,
                      FeatureKind::kRenyiEntropy, 2.0, b, std::nullopt});
    for (int b = 0; b < 5; ++b)
      defs.push_back({std::string("tsallis_entropy_q2_") + kBrainBands[b].name,
                      FeatureKind::kTsallisEntropy, 2.0, b, std::nullopt});
    for (int b = 0; b < 5; ++b)
      defs.push_back({std::string("rel_power_") + kBrainBands[b].name,
                      FeatureKind::kBandPower, 0.0, b, std::nullopt});
    defs.push_back({"rel_power_low", FeatureKind::kBandPower, 0.0, 5, std::nullopt});
    defs.push_back({"total_power", FeatureKind::kTotalPower, 0.0, -1, std::nullopt});
    defs.push_back({"peak_frequency", FeatureKind::kPeakFrequency, 0.0, -1, std::nullopt});
    return FeatureRegistry(std::move(defs));
  }

  /// Evaluate every feature on one channel. Spectral intermediates are
  /// computed once and shared across entries.
  std::vector<double> evaluate(std::span<const double> x, double fs,
                               const FeatureContext& ctx) const {
    std::optional<Periodogram> pg;
    std::array<std::optional<std::vector<double>>, 5> band_sig;
    std::array<std::optional<Periodogram>, 5> band_pg;

    auto full_pg = [&]() -> const Periodogram& {
      if (!pg) pg = periodogram(x, fs, ctx.taper);
      return *pg;
    };
    auto band_signal = [&](int b) -> std::span<const double> {
      auto& slot = band_sig[static_cast<size_t>(b)];
      if (!slot)
        slot = bandpass_filter(x, fs, kBrainBands[static_cast<size_t>(b)].lo_hz,
                               kBrainBands[static_cast<size_t>(b)].hi_hz);
      return *slot;
    };
    auto band_periodogram = [&](int b) -> const Periodogram& {
      auto& slot = band_pg[static_cast<size_t>(b)];
      if (!slot) slot = periodogram(band_signal(b), fs, ctx.taper);
      return *slot;
    };

    std::vector<double> values(defs_.size(), 0.0);
    for (size_t i = 0; i < defs_.size(); ++i) {
      const FeatureDef& def = defs_[i];
      switch (def.kind) {
        case FeatureKind::kMeanAmplitude:
          values[i] = mean_amplitude(normalize_amplitude(x, ctx.signal_range));
          break;
        case FeatureKind::kSpectralEntropy:
          values[i] = spectral_entropy_from(def.band < 0 ? full_pg()
                                                         : band_periodogram(def.band));
          break;
        case FeatureKind::kCwtPeakBand:
          values[i] = static_cast<double>(cwt_peak_band_from(full_pg()));
          break;
        case FeatureKind::kSampleEntropy:
          values[i] = def.band < 0 ? sample_entropy(x)
                                   : sample_entropy(band_signal(def.band));
          break;
        case FeatureKind::kPermutationEntropy: {
          const auto order = static_cast<uint32_t>(def.param);
          values[i] = def.band < 0
                          ? permutation_entropy(x, order)
                          : permutation_entropy(band_signal(def.band), order);
          break;
        }
        case FeatureKind::kRenyiEntropy:
          values[i] = renyi_entropy_from(
              def.band < 0 ? full_pg() : band_periodogram(def.band), def.param);
          break;
        case FeatureKind::kTsallisEntropy:
          values[i] = tsallis_entropy_from(
              def.band < 0 ? full_pg() : band_periodogram(def.band), def.param);
          break;
        case FeatureKind::kBandPower:
          values[i] = band_relative_powers_from(full_pg())
                          [static_cast<size_t>(def.band)];
          break;
        case FeatureKind::kTotalPower:
          values[i] = total_power_from(full_pg());
          break;
        case FeatureKind::kPeakFrequency:
          values[i] = peak_frequency_from(full_pg());
          break;
      }
      if (!std::isfinite(values[i])) values[i] = 0.0;
    }
    return values;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const FeatureDef& def : defs_) {
      nlohmann::json e;
      e["name"] = def.name;
      e["kind"] = to_string(def.kind);
      if (def.param != 0.0) e["param"] = def.param;
      if (def.band >= 0) e["band"] = def.band;
      if (def.fixed_range)
        e["range"] = {def.fixed_range->lo, def.fixed_range->hi};
      arr.push_back(std::move(e));
    }
    return arr;
  }

  static FeatureRegistry from_json(const nlohmann::json& arr) {
    if (!arr.is_array() || arr.empty())
      throw config_error("feature registry JSON: expected a non-empty array");
    std::vector<FeatureDef> defs;
    for (const auto& e : arr) {
      FeatureDef def;
      def.name = e.at("name").get<std::string>();
      def.kind = feature_kind_from_string(e.at("kind").get<std::string>());
      def.param = e.value("param", 0.0);
      def.band = e.value("band", -1);
      if (e.contains("range"))
        def.fixed_range =
            ValueRange{e["range"].at(0).get<double>(), e["range"].at(1).get<double>()};
      defs.push_back(std::move(def));
    }
    return FeatureRegistry(std::move(defs));
  }

private:
  std::vector<FeatureDef> defs_;
};

} // namespace hdseize
