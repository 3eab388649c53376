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
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdseize/dataio.hpp"
#include "hdseize/encoders.hpp"
#include "hdseize/error.hpp"
#include "hdseize/pipeline.hpp"

namespace hdseize {

/// Model storage in multiples of D bits: the item memories each approach
/// keeps resident. C channel vectors, L value levels, B frequency vectors,
/// F feature-index vectors, 64 LBP code vectors.
inline uint64_t memory_factor(Approach a, const EncoderConfig& cfg) {
  switch (a) {
    case Approach::kAmpl:
    case Approach::kEntr:
    case Approach::kCwt:
    case Approach::kRawAmpl: return cfg.channels + cfg.levels;
    case Approach::kFeat3:
    case Approach::kFeat45: return feature_count(a) + cfg.levels;
    case Approach::kFft: return cfg.bins + cfg.levels;
    case Approach::kLbp: return kLbpCodeCount + cfg.channels;
  }
  throw config_error("memory_factor: unknown approach");
}

/// XOR+SUM operations to encode one window, matching the counters the
/// encoders record: single feature 2C; multi feature 2FC + C; spectrum bins
/// 2BC + C; per-sample approaches S*2C + S.
inline uint64_t op_count(Approach a, const EncoderConfig& cfg) {
  const uint64_t C = cfg.channels;
  const uint64_t S = cfg.samples_per_window();
  switch (a) {
    case Approach::kAmpl:
    case Approach::kEntr:
    case Approach::kCwt: return 2 * C;
    case Approach::kFeat3:
    case Approach::kFeat45: return 2 * static_cast<uint64_t>(feature_count(a)) * C + C;
    case Approach::kFft: return 2 * static_cast<uint64_t>(cfg.bins) * C + C;
    case Approach::kRawAmpl:
    case Approach::kLbp: return S * 2 * C + S;
  }
  throw config_error("op_count: unknown approach");
}

/// The configuration whose complexity table the library reproduces:
/// C=16 channels, L=20 value levels, B=64 spectrum bins, 4 s windows at
/// 256 Hz (S=1024), D=10000.
inline EncoderConfig table_one_config() {
  EncoderConfig cfg;
  cfg.dim = 10000;
  cfg.levels = 20;
  cfg.bins = 64;
  cfg.channels = 16;
  cfg.w_len_s = 4.0;
  cfg.w_step_s = 0.5;
  cfg.fs = 256.0;
  return cfg;
}

/// Same geometry with the 18-channel scalp montage common to long-term EEG
/// recordings; channel count is otherwise a free parameter.
inline EncoderConfig eeg18_config() {
  EncoderConfig cfg = table_one_config();
  cfg.channels = 18;
  return cfg;
}

struct TimingReport {
  double feature_ms = 0.0; // mean per window
  double hd_ms = 0.0;      // mean per window
  uint32_t windows = 0;

  double total_ms() const { return feature_ms + hd_ms; }
  double ratio_feature_vs_hd() const {
    return hd_ms > 0.0 ? feature_ms / hd_ms : 0.0;
  }
};

/// Synthetic pink-noise windows for timing runs.
inline std::vector<WindowRecord> make_timing_windows(const EncoderConfig& cfg,
                                                     uint32_t count,
                                                     uint64_t seed) {
  if (count == 0) throw config_error("time_profile: empty window set");
  std::vector<WindowRecord> windows(count);
  const uint32_t S = cfg.samples_per_window();
  for (uint32_t w = 0; w < count; ++w) {
    windows[w].fs = cfg.fs;
    windows[w].samples.resize(cfg.channels);
    for (uint32_t c = 0; c < cfg.channels; ++c) {
      Rng rng(derive_seed(seed, "timing-window",
                          static_cast<uint64_t>(w) * 4096 + c));
      detail::PinkNoise pink(rng);
      auto& ch = windows[w].samples[c];
      ch.resize(S);
      for (uint32_t t = 0; t < S; ++t) ch[t] = 20.0 * pink.next();
    }
  }
  return windows;
}

/// Split wall-clock timing of one approach over the given windows: the
/// feature stage (feature computation + quantization) and the vector stage
/// (binds and bundle accumulation), measured with a monotonic clock.
/// Normalization ranges are estimated beforehand on a small untimed subset.
inline TimingReport time_profile(Approach approach,
                                 std::span<const WindowRecord> windows,
                                 EncoderConfig cfg,
                                 const FeatureRegistry* registry = nullptr) {
  if (windows.empty()) throw config_error("time_profile: empty window set");
  cfg.approach = approach;
  std::optional<FeatureRegistry> owned;
  if (registry == nullptr && is_multi_feature(approach)) {
    owned.emplace(approach == Approach::kFeat3 ? FeatureRegistry::three()
                                               : FeatureRegistry::default_45());
    registry = &*owned;
  }
  const MemorySet memories = MemorySet::build(cfg);

  // Untimed range estimation from a small prefix.
  const size_t probe = std::min<size_t>(windows.size(), 32);
  ValueRange signal_range{0.0, 1.0};
  if (approach != Approach::kLbp) {
    std::vector<double> pool;
    for (size_t w = 0; w < probe; ++w)
      for (const auto& ch : windows[w].samples)
        pool.insert(pool.end(), ch.begin(), ch.end());
    signal_range = robust_range(std::move(pool), cfg.norm_lo_pct, cfg.norm_hi_pct);
  }
  std::vector<WindowValues> probe_values;
  for (size_t w = 0; w < probe; ++w)
    probe_values.push_back(window_values(windows[w], cfg, registry, signal_range));
  const NormalizationRanges ranges =
      detail::estimate_ranges(signal_range, probe_values, cfg, registry);

  using clock = std::chrono::steady_clock;
  TimingReport report;
  report.windows = static_cast<uint32_t>(windows.size());
  double feat_ns = 0.0, hd_ns = 0.0;
  uint64_t checksum = 0; // keep results observable
  for (const WindowRecord& w : windows) {
    const auto t0 = clock::now();
    const WindowSymbols symbols = window_symbols(w, cfg, registry, ranges);
    const auto t1 = clock::now();
    const EncodedWindow enc = encode_symbols(symbols, memories, cfg);
    const auto t2 = clock::now();
    checksum += enc.hv.popcount();
    feat_ns += std::chrono::duration<double, std::nano>(t1 - t0).count();
    hd_ns += std::chrono::duration<double, std::nano>(t2 - t1).count();
  }
  volatile uint64_t sink = checksum;
  (void)sink;
  report.feature_ms = feat_ns / 1e6 / static_cast<double>(windows.size());
  report.hd_ms = hd_ns / 1e6 / static_cast<double>(windows.size());
  return report;
}

// ---------------------------------------------------------------------------
// Profile CSV: one column per approach, mirroring the complexity table.
// ---------------------------------------------------------------------------

struct ProfileOptions {
  bool with_timing = false;
  uint32_t timing_windows = 1000;
  uint64_t seed = 1;
  std::string preset; // empty = custom configuration
};

inline std::string profile_csv(const EncoderConfig& base,
                               const ProfileOptions& opt) {
  std::string out;
  char buf[256];
  out += "# hdseize profile\n";
  if (!opt.preset.empty()) out += "# preset=" + opt.preset + "\n";
  std::snprintf(buf, sizeof(buf),
                "# C=%u L=%u B=%u S=%u D=%u fs=%g w_len=%g\n", base.channels,
                base.levels, base.bins, base.samples_per_window(), base.dim,
                base.fs, base.w_len_s);
  out += buf;

  std::vector<uint64_t> mem, ops;
  for (Approach a : kAllApproaches) {
    mem.push_back(memory_factor(a, base));
    ops.push_back(op_count(a, base));
  }
  const auto [mem_min, mem_max] = std::minmax_element(mem.begin(), mem.end());
  const auto [ops_min, ops_max] = std::minmax_element(ops.begin(), ops.end());
  std::snprintf(buf, sizeof(buf),
                "# memory ratio largest/smallest = %.2f (%llu/%llu); "
                "ops ratio largest/smallest = %.0f (%llu/%llu)\n",
                static_cast<double>(*mem_max) / static_cast<double>(*mem_min),
                static_cast<unsigned long long>(*mem_max),
                static_cast<unsigned long long>(*mem_min),
                static_cast<double>(*ops_max) / static_cast<double>(*ops_min),
                static_cast<unsigned long long>(*ops_max),
                static_cast<unsigned long long>(*ops_min));
  out += buf;

  out += "metric";
  for (Approach a : kAllApproaches) {
    out += ",";
    out += to_string(a);
  }
  out += "\n";

  out += "memory_factor_of_D";
  for (uint64_t m : mem) {
    std::snprintf(buf, sizeof(buf), ",%llu", static_cast<unsigned long long>(m));
    out += buf;
  }
  out += "\n";

  out += "xor_sum_ops_per_window";
  for (uint64_t o : ops) {
    std::snprintf(buf, sizeof(buf), ",%llu", static_cast<unsigned long long>(o));
    out += buf;
  }
  out += "\n";

  if (opt.with_timing) {
    const std::vector<WindowRecord> windows =
        make_timing_windows(base, opt.timing_windows, opt.seed);
    std::vector<TimingReport> reports;
    for (Approach a : kAllApproaches)
      reports.push_back(time_profile(a, windows, base));
    auto row = [&](const char* name, auto getter) {
      out += name;
      for (const TimingReport& r : reports) {
        std::snprintf(buf, sizeof(buf), ",%.5f", getter(r));
        out += buf;
      }
      out += "\n";
    };
    row("feature_time_ms", [](const TimingReport& r) { return r.feature_ms; });
    row("hdvec_time_ms", [](const TimingReport& r) { return r.hd_ms; });
    row("total_time_ms", [](const TimingReport& r) { return r.total_ms(); });
    row("ratio_feature_vs_hdvec",
        [](const TimingReport& r) { return r.ratio_feature_vs_hd(); });
  }
  return out;
}

} // namespace hdseize
