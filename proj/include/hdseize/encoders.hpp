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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdseize/error.hpp"
#include "hdseize/features.hpp"
#include "hdseize/hypervector.hpp"
#include "hdseize/item_memory.hpp"

namespace hdseize {

enum class Approach : uint8_t {
  kAmpl = 0,
  kEntr,
  kCwt,
  kFeat3,
  kFeat45,
  kFft,
  kRawAmpl,
  kLbp,
};

/// All approaches in reporting column order.
inline constexpr std::array<Approach, 8> kAllApproaches = {
    Approach::kAmpl, Approach::kEntr,    Approach::kCwt,  Approach::kFeat3,
    Approach::kFeat45, Approach::kFft, Approach::kRawAmpl, Approach::kLbp,
};

inline const char* to_string(Approach a) {
  switch (a) {
    case Approach::kAmpl: return "Ampl";
    case Approach::kEntr: return "Entr";
    case Approach::kCwt: return "CWT";
    case Approach::kFeat3: return "3Feat";
    case Approach::kFeat45: return "45Feat";
    case Approach::kFft: return "FFT";
    case Approach::kRawAmpl: return "RawAmpl";
    case Approach::kLbp: return "LBP";
  }
  return "unknown";
}

inline Approach parse_approach(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  const std::string n = lower(name);
  for (Approach a : kAllApproaches)
    if (n == lower(to_string(a))) return a;
  std::string known;
  for (Approach a : kAllApproaches) {
    if (!known.empty()) known += ", ";
    known += to_string(a);
  }
  throw config_error("unknown approach '" + std::string(name) +
                     "' (known: " + known + ")");
}

/// Number of scalar features per channel for the feature-based approaches.
inline uint32_t feature_count(Approach a) {
  switch (a) {
    case Approach::kAmpl:
    case Approach::kEntr:
    case Approach::kCwt: return 1;
    case Approach::kFeat3: return 3;
    case Approach::kFeat45: return 45;
    default: return 0;
  }
}

inline bool is_single_feature(Approach a) {
  return a == Approach::kAmpl || a == Approach::kEntr || a == Approach::kCwt;
}

inline bool is_multi_feature(Approach a) {
  return a == Approach::kFeat3 || a == Approach::kFeat45;
}

/// Everything that parameterizes one encoding session.
struct EncoderConfig {
  Approach approach = Approach::kAmpl;
  uint32_t dim = 10000;     // D
  uint32_t levels = 20;     // L, value levels
  uint32_t bins = 64;       // B, aggregated spectrum bins
  uint32_t channels = 16;   // C
  double w_len_s = 4.0;
  double w_step_s = 0.5;
  double fs = 256.0;
  Taper taper = Taper::kHann;
  uint64_t master_seed = 1;
  double norm_lo_pct = 1.0; // robust range percentiles
  double norm_hi_pct = 99.0;
  double train_step_s = 0.0; // 0 = same as w_step_s

  uint32_t samples_per_window() const {
    return static_cast<uint32_t>(std::llround(w_len_s * fs));
  }
  double train_step() const {
    return train_step_s > 0.0 ? train_step_s : w_step_s;
  }
};

/// Full-width vector operations spent encoding one window: one XOR = one
/// whole-vector bind, one SUM = one whole-vector accumulation into a bundle.
/// Threshold/rounding at bundle finalization is not counted.
struct OpCounter {
  uint64_t xor_ops = 0;
  uint64_t sum_ops = 0;
  uint64_t total() const { return xor_ops + sum_ops; }
};

/// The item memories one approach needs, derived from the master seed. Only
/// the memories the approach actually uses are built, so total_rows() is the
/// model-storage footprint in multiples of D bits.
struct MemorySet {
  std::optional<RandomItemMemory> channels;
  std::optional<RandomItemMemory> features;
  std::optional<RandomItemMemory> frequencies;
  std::optional<RandomItemMemory> lbp;
  std::optional<LevelItemMemory> levels;

  static MemorySet build(const EncoderConfig& cfg) {
    MemorySet m;
    const uint64_t seed = cfg.master_seed;
    switch (cfg.approach) {
      case Approach::kAmpl:
      case Approach::kEntr:
      case Approach::kCwt:
      case Approach::kRawAmpl:
        m.channels.emplace(cfg.channels, cfg.dim,
                           derive_seed(seed, "channel-memory"),
                           MemoryPurpose::kChannel);
        m.levels.emplace(cfg.levels, cfg.dim, derive_seed(seed, "value-memory"));
        break;
      case Approach::kFeat3:
      case Approach::kFeat45:
        m.features.emplace(feature_count(cfg.approach), cfg.dim,
                           derive_seed(seed, "feature-memory"),
                           MemoryPurpose::kFeature);
        m.levels.emplace(cfg.levels, cfg.dim, derive_seed(seed, "value-memory"));
        break;
      case Approach::kFft:
        m.frequencies.emplace(cfg.bins, cfg.dim,
                              derive_seed(seed, "frequency-memory"),
                              MemoryPurpose::kFrequency);
        m.levels.emplace(cfg.levels, cfg.dim, derive_seed(seed, "value-memory"));
        break;
      case Approach::kLbp:
        m.lbp.emplace(kLbpCodeCount, cfg.dim, derive_seed(seed, "lbp-memory"),
                      MemoryPurpose::kLbpCode);
        m.channels.emplace(cfg.channels, cfg.dim,
                           derive_seed(seed, "channel-memory"),
                           MemoryPurpose::kChannel);
        break;
    }
    return m;
  }

  uint64_t total_rows() const {
    uint64_t rows = 0;
    if (channels) rows += channels->size();
    if (features) rows += features->size();
    if (frequencies) rows += frequencies->size();
    if (lbp) rows += lbp->size();
    if (levels) rows += levels->levels();
    return rows;
  }
};

/// Per-stream normalization ranges for one recording file, computed from
/// robust percentiles (see robust_range). `signal` feeds the raw-amplitude
/// path and the mean-amplitude feature; `per_feature` has one entry per
/// feature stream (F for the feature approaches, one shared entry for the
/// aggregated spectrum bins).
struct NormalizationRanges {
  ValueRange signal{0.0, 1.0};
  std::vector<ValueRange> per_feature;
};

/// Percentile-based robust range. A constant stream widens to a unit-ish
/// interval around the value so downstream quantization stays defined.
inline ValueRange robust_range(std::vector<double> values, double lo_pct,
                               double hi_pct) {
  if (values.empty()) throw data_error("robust_range: no values");
  std::sort(values.begin(), values.end());
  auto pick = [&](double pct) {
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto i = static_cast<size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < values.size()
               ? values[i] * (1.0 - frac) + values[i + 1] * frac
               : values[i];
  };
  ValueRange r{pick(lo_pct), pick(hi_pct)};
  if (!(r.hi - r.lo > 0.0)) {
    const double pad = std::max(0.5, std::abs(r.lo) * 0.5);
    r.lo -= pad;
    r.hi += pad;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Encoding stage 1: window -> scalar streams (feature computation)
// ---------------------------------------------------------------------------

/// Pre-quantization scalar streams of one window. For LBP the stream is the
/// code sequence itself (already a symbol); for everything else it is real
/// values awaiting quantization against the per-file ranges.
struct WindowValues {
  Approach approach = Approach::kAmpl;
  std::vector<std::vector<uint8_t>> codes;   // LBP: channels x S
  std::vector<std::vector<double>> values;   // others: channels x {S, B, F}
};

/// Quantized symbol streams, ready for the pure vector stage.
struct WindowSymbols {
  Approach approach = Approach::kAmpl;
  std::vector<std::vector<uint32_t>> symbols; // channels x {S, B, F}
};

inline WindowValues window_values(const WindowRecord& window,
                                  const EncoderConfig& cfg,
                                  const FeatureRegistry* registry,
                                  ValueRange signal_range) {
  if (window.channels() != cfg.channels)
    throw config_error("encode: window has " + std::to_string(window.channels()) +
                       " channels, config says " + std::to_string(cfg.channels));
  WindowValues out;
  out.approach = cfg.approach;
  const uint32_t S = window.sample_count();
  switch (cfg.approach) {
    case Approach::kLbp: {
      out.codes.reserve(cfg.channels);
      for (const auto& ch : window.samples) {
        std::vector<uint8_t> codes = lbp_codes(ch);
        // One code per sample position: the trailing positions that have no
        // complete 6-transition lookahead reuse the final code, so the
        // vector stage walks exactly S per-sample steps.
        codes.resize(S, codes.back());
        out.codes.push_back(std::move(codes));
      }
      break;
    }
    case Approach::kRawAmpl:
      out.values.reserve(cfg.channels);
      for (const auto& ch : window.samples) out.values.push_back(ch);
      break;
    case Approach::kFft:
      out.values.reserve(cfg.channels);
      for (const auto& ch : window.samples)
        out.values.push_back(fft_bins(ch, cfg.fs, cfg.bins, cfg.taper));
      break;
    case Approach::kAmpl:
      for (const auto& ch : window.samples)
        out.values.push_back(
            {mean_amplitude(normalize_amplitude(ch, signal_range))});
      break;
    case Approach::kEntr:
      for (const auto& ch : window.samples)
        out.values.push_back({spectral_entropy(ch, cfg.fs, cfg.taper)});
      break;
    case Approach::kCwt:
      for (const auto& ch : window.samples)
        out.values.push_back(
            {static_cast<double>(cwt_peak_band(ch, cfg.fs, cfg.taper))});
      break;
    case Approach::kFeat3:
    case Approach::kFeat45: {
      if (registry == nullptr)
        throw config_error("encode: feature approach needs a registry");
      if (registry->size() != feature_count(cfg.approach))
        throw config_error("encode: registry has " +
                           std::to_string(registry->size()) +
                           " features, approach needs " +
                           std::to_string(feature_count(cfg.approach)));
      FeatureContext ctx{signal_range, cfg.taper};
      for (const auto& ch : window.samples)
        out.values.push_back(registry->evaluate(ch, cfg.fs, ctx));
      break;
    }
  }
  return out;
}

/// Quantize value streams against the per-file ranges. LBP codes pass
/// through unchanged.
inline WindowSymbols quantize_values(const WindowValues& vals,
                                     const EncoderConfig& cfg,
                                     const NormalizationRanges& ranges) {
  WindowSymbols out;
  out.approach = vals.approach;
  switch (vals.approach) {
    case Approach::kLbp:
      out.symbols.reserve(vals.codes.size());
      for (const auto& codes : vals.codes)
        out.symbols.emplace_back(codes.begin(), codes.end());
      break;
    case Approach::kRawAmpl:
      out.symbols.reserve(vals.values.size());
      for (const auto& ch : vals.values) {
        std::vector<uint32_t> syms(ch.size());
        for (size_t i = 0; i < ch.size(); ++i)
          syms[i] = quantize(ch[i], ranges.signal, cfg.levels);
        out.symbols.push_back(std::move(syms));
      }
      break;
    case Approach::kFft: {
      if (ranges.per_feature.empty())
        throw config_error("encode: missing spectrum-bin range");
      const ValueRange r = ranges.per_feature.front();
      for (const auto& ch : vals.values) {
        std::vector<uint32_t> syms(ch.size());
        for (size_t i = 0; i < ch.size(); ++i)
          syms[i] = quantize(ch[i], r, cfg.levels);
        out.symbols.push_back(std::move(syms));
      }
      break;
    }
    default: {
      const uint32_t F = feature_count(vals.approach);
      if (ranges.per_feature.size() != F)
        throw config_error("encode: expected " + std::to_string(F) +
                           " feature ranges, got " +
                           std::to_string(ranges.per_feature.size()));
      for (const auto& ch : vals.values) {
        std::vector<uint32_t> syms(ch.size());
        for (size_t f = 0; f < ch.size(); ++f)
          syms[f] = quantize(ch[f], ranges.per_feature[f], cfg.levels);
        out.symbols.push_back(std::move(syms));
      }
      break;
    }
  }
  return out;
}

inline WindowSymbols window_symbols(const WindowRecord& window,
                                    const EncoderConfig& cfg,
                                    const FeatureRegistry* registry,
                                    const NormalizationRanges& ranges) {
  return quantize_values(window_values(window, cfg, registry, ranges.signal),
                         cfg, ranges);
}

// ---------------------------------------------------------------------------
// Encoding stage 2: symbols -> hypervector (pure vector operations)
// ---------------------------------------------------------------------------

struct EncodedWindow {
  Hypervector hv;
  OpCounter ops;
};

/// Bind/bundle topology per approach:
///  - LBP, RawAmpl: per sample, bind value x channel across channels and
///    bundle (C XOR + C SUM each), then bundle the S per-sample vectors
///    (one SUM each): S*(2C) + S ops.
///  - FFT: per channel, bind bin value x frequency and bundle over B bins
///    (2B ops), then bundle the C channel vectors: C*2B + C ops.
///  - Single feature: bind value x channel, bundle across channels: 2C ops.
///  - Multi feature: per channel, bind value x feature index and bundle over
///    F features (2F ops), then bundle channels: C*2F + C ops.
inline EncodedWindow encode_symbols(const WindowSymbols& sym,
                                    const MemorySet& memories,
                                    const EncoderConfig& cfg) {
  EncodedWindow out;
  OpCounter& ops = out.ops;
  const uint32_t D = cfg.dim;
  const uint32_t C = cfg.channels;
  if (sym.symbols.size() != C)
    throw config_error("encode: symbol stream count mismatch");
  Hypervector bound(D);

  switch (sym.approach) {
    case Approach::kLbp:
    case Approach::kRawAmpl: {
      const bool is_lbp = sym.approach == Approach::kLbp;
      if (!memories.channels || (is_lbp ? !memories.lbp : !memories.levels))
        throw config_error("encode: missing item memory for approach");
      const size_t S = sym.symbols.front().size();
      BitplaneAccumulator window_acc(D);
      BitplaneAccumulator sample_acc(D);
      for (size_t t = 0; t < S; ++t) {
        sample_acc.reset();
        for (uint32_t c = 0; c < C; ++c) {
          const uint32_t s = sym.symbols[c][t];
          const Hypervector& value_hv =
              is_lbp ? memories.lbp->at(s) : memories.levels->at(s);
          bind_into(value_hv, memories.channels->at(c), bound);
          ++ops.xor_ops;
          sample_acc.add(bound);
          ++ops.sum_ops;
        }
        window_acc.add(sample_acc.finalize());
        ++ops.sum_ops;
      }
      out.hv = window_acc.finalize();
      break;
    }
    case Approach::kFft: {
      if (!memories.frequencies || !memories.levels)
        throw config_error("encode: missing item memory for approach");
      const size_t B = sym.symbols.front().size();
      BitplaneAccumulator window_acc(D);
      BitplaneAccumulator channel_acc(D);
      for (uint32_t c = 0; c < C; ++c) {
        channel_acc.reset();
        for (size_t b = 0; b < B; ++b) {
          bind_into(memories.levels->at(sym.symbols[c][b]),
                    memories.frequencies->at(static_cast<uint32_t>(b)), bound);
          ++ops.xor_ops;
          channel_acc.add(bound);
          ++ops.sum_ops;
        }
        window_acc.add(channel_acc.finalize());
        ++ops.sum_ops;
      }
      out.hv = window_acc.finalize();
      break;
    }
    case Approach::kAmpl:
    case Approach::kEntr:
    case Approach::kCwt: {
      if (!memories.channels || !memories.levels)
        throw config_error("encode: missing item memory for approach");
      BitplaneAccumulator acc(D);
      for (uint32_t c = 0; c < C; ++c) {
        bind_into(memories.levels->at(sym.symbols[c][0]),
                  memories.channels->at(c), bound);
        ++ops.xor_ops;
        acc.add(bound);
        ++ops.sum_ops;
      }
      out.hv = acc.finalize();
      break;
    }
    case Approach::kFeat3:
    case Approach::kFeat45: {
      if (!memories.features || !memories.levels)
        throw config_error("encode: missing item memory for approach");
      const auto F = static_cast<uint32_t>(sym.symbols.front().size());
      if (F > memories.features->size())
        throw config_error("encode: more feature streams than index vectors");
      BitplaneAccumulator window_acc(D);
      BitplaneAccumulator channel_acc(D);
      for (uint32_t c = 0; c < C; ++c) {
        channel_acc.reset();
        for (uint32_t f = 0; f < F; ++f) {
          bind_into(memories.levels->at(sym.symbols[c][f]),
                    memories.features->at(f), bound);
          ++ops.xor_ops;
          channel_acc.add(bound);
          ++ops.sum_ops;
        }
        window_acc.add(channel_acc.finalize());
        ++ops.sum_ops;
      }
      out.hv = window_acc.finalize();
      break;
    }
  }
  return out;
}

inline EncodedWindow encode_window(const WindowRecord& window,
                                   const EncoderConfig& cfg,
                                   const MemorySet& memories,
                                   const FeatureRegistry* registry,
                                   const NormalizationRanges& ranges) {
  return encode_symbols(window_symbols(window, cfg, registry, ranges), memories,
                        cfg);
}

} // namespace hdseize
