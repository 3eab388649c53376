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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdseize/error.hpp"
#include "hdseize/seeds.hpp"

namespace hdseize {

inline constexpr double kTargetFs = 256.0;
inline constexpr double kPreOnsetExclusion_s = 60.0;   // 1 minute before onset
inline constexpr double kPostictalExclusion_s = 900.0; // 15 minutes after offset

struct SeizureSpan {
  double onset_s = 0.0;
  double offset_s = 0.0;
};

/// A raw multichannel recording with seizure annotations.
struct Recording {
  std::string subject;
  double fs = 256.0;
  std::vector<std::vector<double>> channels; // channels x samples
  std::vector<SeizureSpan> seizures;         // sorted, non-overlapping

  size_t sample_count() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration_s() const {
    return static_cast<double>(sample_count()) / fs;
  }

  void validate() const {
    if (channels.empty()) throw data_error("recording: no channels");
    for (const auto& ch : channels)
      if (ch.size() != channels.front().size())
        throw data_error("recording: channels have unequal lengths");
    double prev_end = -1.0;
    for (const SeizureSpan& s : seizures) {
      if (!(s.onset_s < s.offset_s))
        throw data_error("recording: seizure with non-positive duration");
      if (s.onset_s < prev_end)
        throw data_error("recording: overlapping or unsorted seizures");
      if (s.offset_s > duration_s() + 1e-9)
        throw data_error("recording: seizure beyond recording end");
      prev_end = s.offset_s;
    }
  }
};

/// One seizure's worth of data: an interictal stretch followed by the full
/// ictal stretch, equal length to within one sample.
struct BalancedFile {
  std::string name;
  std::string subject;
  double fs = 256.0;
  std::vector<std::vector<double>> channels; // channels x samples
  std::vector<uint8_t> labels;               // per sample, 1 = ictal

  struct Provenance {
    std::string source;
    double ictal_onset_s = 0.0;
    double ictal_offset_s = 0.0;
    double interictal_start_s = 0.0;
  } provenance;

  size_t sample_count() const {
    return channels.empty() ? 0 : channels.front().size();
  }

  void validate() const {
    if (channels.empty()) throw data_error(name + ": no channels");
    for (const auto& ch : channels)
      if (ch.size() != labels.size())
        throw data_error(name + ": channel/label length mismatch");
    size_t ictal = 0;
    for (uint8_t l : labels) ictal += l;
    const size_t interictal = labels.size() - ictal;
    if (ictal == 0 || interictal == 0)
      throw data_error(name + ": missing one class");
    if (ictal > interictal + 1 || interictal > ictal + 1)
      throw data_error(name + ": classes not balanced (" +
                       std::to_string(ictal) + " ictal vs " +
                       std::to_string(interictal) + " interictal samples)");
  }
};

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Linear-interpolation resampling of every channel to target_fs. Annotation
/// times are in seconds and carry over unchanged. A recording already at the
/// target rate passes through bit-identically.
inline Recording resample(const Recording& rec, double target_fs = kTargetFs) {
  if (rec.fs <= 0.0) throw config_error("resample: non-positive sampling rate");
  for (const auto& ch : rec.channels)
    for (double v : ch)
      if (!std::isfinite(v)) throw data_error("resample: non-finite sample");
  if (rec.fs == target_fs) return rec;
  Recording out;
  out.subject = rec.subject;
  out.fs = target_fs;
  out.seizures = rec.seizures;
  const size_t n_in = rec.sample_count();
  if (n_in == 0) throw data_error("resample: empty recording");
  const double ratio = target_fs / rec.fs;
  const size_t n_out =
      static_cast<size_t>(std::floor(static_cast<double>(n_in - 1) * ratio)) + 1;
  out.channels.resize(rec.channels.size());
  for (size_t c = 0; c < rec.channels.size(); ++c) {
    const auto& in = rec.channels[c];
    auto& dst = out.channels[c];
    dst.resize(n_out);
    for (size_t j = 0; j < n_out; ++j) {
      const double src_pos = static_cast<double>(j) / ratio;
      const auto i0 = static_cast<size_t>(src_pos);
      const double frac = src_pos - static_cast<double>(i0);
      dst[j] = i0 + 1 < n_in ? in[i0] * (1.0 - frac) + in[i0 + 1] * frac
                             : in[i0];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Balanced per-seizure files
// ---------------------------------------------------------------------------

namespace detail {

struct Interval {
  double begin, end;
  double length() const { return end - begin; }
};

/// Subtract `cut` intervals from `base`, returning the remaining pieces.
inline std::vector<Interval> subtract_intervals(Interval base,
                                                std::vector<Interval> cuts) {
  std::sort(cuts.begin(), cuts.end(),
            [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  std::vector<Interval> free_list;
  double cursor = base.begin;
  for (const Interval& cut : cuts) {
    if (cut.end <= cursor || cut.begin >= base.end) continue;
    if (cut.begin > cursor) free_list.push_back({cursor, std::min(cut.begin, base.end)});
    cursor = std::max(cursor, cut.end);
  }
  if (cursor < base.end) free_list.push_back({cursor, base.end});
  return free_list;
}

} // namespace detail

/// Eligible interictal intervals for the seizure at `index`: everything
/// before its onset, minus the exclusion zone of every seizure
/// [onset - 60 s, offset + 900 s] (ictal span, the minute before onset, and
/// the 15 minutes after, all of which may contain ictal patterns).
inline std::vector<detail::Interval> eligible_interictal(
    const Recording& rec, size_t index) {
  const SeizureSpan& target = rec.seizures.at(index);
  std::vector<detail::Interval> cuts;
  for (const SeizureSpan& s : rec.seizures)
    cuts.push_back({s.onset_s - kPreOnsetExclusion_s,
                    s.offset_s + kPostictalExclusion_s});
  return detail::subtract_intervals({0.0, target.onset_s}, std::move(cuts));
}

/// Build one balanced file per seizure: the full ictal span plus an
/// equal-length, seeded-randomly placed interictal span taken from eligible
/// data before onset. Errors if any seizure lacks enough eligible signal.
inline std::vector<BalancedFile> make_balanced_files(const Recording& rec,
                                                     uint64_t seed) {
  rec.validate();
  if (rec.seizures.empty())
    throw data_error("make_balanced_files: recording has no seizures");
  std::vector<BalancedFile> files;
  for (size_t i = 0; i < rec.seizures.size(); ++i) {
    const SeizureSpan& seiz = rec.seizures[i];
    const auto onset_idx = static_cast<size_t>(std::llround(seiz.onset_s * rec.fs));
    const auto offset_idx =
        std::min(static_cast<size_t>(std::llround(seiz.offset_s * rec.fs)),
                 rec.sample_count());
    const size_t n_ictal = offset_idx - onset_idx;

    const double need_s = static_cast<double>(n_ictal) / rec.fs;
    std::vector<detail::Interval> eligible = eligible_interictal(rec, i);
    // Shrink each free interval by one sample per side so that index
    // rounding can never push the chosen span across an exclusion boundary.
    for (auto& iv : eligible) {
      iv.begin += 1.0 / rec.fs;
      iv.end -= 1.0 / rec.fs;
    }
    std::erase_if(eligible, [&](const detail::Interval& iv) {
      return iv.length() < need_s;
    });
    if (eligible.empty())
      throw data_error("make_balanced_files: seizure " + std::to_string(i + 1) +
                       " (onset " + std::to_string(seiz.onset_s) +
                       " s) has no eligible interictal stretch of " +
                       std::to_string(need_s) + " s before onset");

    // Uniform placement over all feasible start positions.
    double slack = 0.0;
    for (const auto& iv : eligible) slack += iv.length() - need_s;
    Rng rng(derive_seed(seed, "interictal-placement", i));
    double start_s = eligible.front().begin;
    if (slack > 0.0) {
      double pick = rng.uniform(0.0, slack);
      for (const auto& iv : eligible) {
        const double here = iv.length() - need_s;
        if (pick <= here) {
          start_s = iv.begin + pick;
          break;
        }
        pick -= here;
      }
    }
    auto inter_begin = static_cast<size_t>(std::llround(start_s * rec.fs));
    inter_begin = std::min(inter_begin, rec.sample_count() - n_ictal);

    BalancedFile file;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "seiz%02zu", i + 1);
    file.name = rec.subject + "_" + buf;
    file.subject = rec.subject;
    file.fs = rec.fs;
    file.provenance = {rec.subject, seiz.onset_s, seiz.offset_s, start_s};
    file.channels.resize(rec.channels.size());
    for (size_t c = 0; c < rec.channels.size(); ++c) {
      auto& dst = file.channels[c];
      const auto& src = rec.channels[c];
      dst.reserve(2 * n_ictal);
      dst.insert(dst.end(), src.begin() + static_cast<long>(inter_begin),
                 src.begin() + static_cast<long>(inter_begin + n_ictal));
      dst.insert(dst.end(), src.begin() + static_cast<long>(onset_idx),
                 src.begin() + static_cast<long>(offset_idx));
    }
    file.labels.assign(n_ictal, 0);
    file.labels.insert(file.labels.end(), n_ictal, 1);
    file.validate();
    files.push_back(std::move(file));
  }
  return files;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SynthSpec {
  uint32_t n_seizures = 4;
  uint32_t channels = 16;
  double fs = 256.0;
  double min_seizure_s = 20.0;
  double max_seizure_s = 60.0;
  double osc_lo_hz = 3.0;
  double osc_hi_hz = 5.0;
  double noise_std_uv = 20.0;
  double osc_amp_factor = 4.0; // oscillation amplitude as multiple of noise std
  double ramp_s = 0.5;         // onset/offset amplitude ramp
  std::string subject = "synth01";
};

namespace detail {

/// Pink-ish (1/f) noise via a cascade of three one-pole lowpass filters fed
/// with white noise (Kellet's economy filter), scaled to unit variance.
class PinkNoise {
public:
  explicit PinkNoise(Rng& rng) : rng_(rng) {}

  double next() {
    const double white = rng_.gaussian();
    b0_ = 0.99765 * b0_ + white * 0.0990460;
    b1_ = 0.96300 * b1_ + white * 0.2965164;
    b2_ = 0.57000 * b2_ + white * 1.0526913;
    return (b0_ + b1_ + b2_ + white * 0.1848) / 3.1;
  }

private:
  Rng& rng_;
  double b0_ = 0.0, b1_ = 0.0, b2_ = 0.0;
};

} // namespace detail

/// Desk-scale synthetic subject: pink-noise interictal baselines, and ictal
/// spans that add a high-amplitude low-frequency (3-5 Hz by default)
/// oscillation with seeded per-file frequency and per-channel jitter. Output
/// files already satisfy the balanced-file invariants.
inline std::vector<BalancedFile> synth_subject(const SynthSpec& spec,
                                               uint64_t seed) {
  if (spec.n_seizures < 2)
    throw config_error("synth_subject: need at least 2 seizures for"
                       " leave-one-out validation");
  std::vector<BalancedFile> files;
  for (uint32_t s = 0; s < spec.n_seizures; ++s) {
    Rng rng(derive_seed(seed, "synth-file", s));
    const double seiz_s = rng.uniform(spec.min_seizure_s, spec.max_seizure_s);
    const auto n_ictal = static_cast<size_t>(std::llround(seiz_s * spec.fs));
    const size_t n_total = 2 * n_ictal;
    const double osc_hz = rng.uniform(spec.osc_lo_hz, spec.osc_hi_hz);

    BalancedFile file;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "seiz%02u", s + 1);
    file.name = spec.subject + "_" + buf;
    file.subject = spec.subject;
    file.fs = spec.fs;
    file.provenance = {"synthetic", static_cast<double>(n_ictal) / spec.fs,
                       static_cast<double>(n_total) / spec.fs, 0.0};
    file.channels.resize(spec.channels);
    for (uint32_t c = 0; c < spec.channels; ++c) {
      Rng ch_rng(derive_seed(seed, "synth-channel",
                             static_cast<uint64_t>(s) * 4096 + c));
      detail::PinkNoise pink(ch_rng);
      const double amp = spec.noise_std_uv * spec.osc_amp_factor *
                         ch_rng.uniform(0.8, 1.2);
      const double phase = ch_rng.uniform(0.0, 2.0 * M_PI);
      auto& ch = file.channels[c];
      ch.resize(n_total);
      for (size_t t = 0; t < n_total; ++t) {
        double v = spec.noise_std_uv * pink.next();
        if (t >= n_ictal) {
          const double into_s = static_cast<double>(t - n_ictal) / spec.fs;
          const double left_s =
              static_cast<double>(n_total - 1 - t) / spec.fs;
          double envelope = 1.0;
          if (spec.ramp_s > 0.0)
            envelope = std::min({1.0, into_s / spec.ramp_s, left_s / spec.ramp_s});
          v += amp * envelope *
               std::sin(2.0 * M_PI * osc_hz * static_cast<double>(t) / spec.fs +
                        phase);
        }
        ch[t] = v;
      }
    }
    file.labels.assign(n_ictal, 0);
    file.labels.insert(file.labels.end(), n_ictal, 1);
    file.validate();
    files.push_back(std::move(file));
  }
  return files;
}

// ---------------------------------------------------------------------------
// Signal CSV format
//
//   time_s,ch01,...,chNN,label
//
// One row per sample; label is 0 or 1; UTF-8, LF line endings, decimal
// points, no thousands separators. Values are written with six decimals,
// which round-trips within 1e-6.
// ---------------------------------------------------------------------------

inline void write_signal_csv(const std::string& path, const BalancedFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open " + path + " for writing");
  out << "time_s";
  for (size_t c = 0; c < file.channels.size(); ++c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), ",ch%02zu", c + 1);
    out << buf;
  }
  out << ",label\n";
  char num[48];
  for (size_t t = 0; t < file.sample_count(); ++t) {
    std::snprintf(num, sizeof(num), "%.6f", static_cast<double>(t) / file.fs);
    out << num;
    for (const auto& ch : file.channels) {
      std::snprintf(num, sizeof(num), ",%.6f", ch[t]);
      out << num;
    }
    out << ',' << (file.labels[t] ? '1' : '0') << '\n';
  }
  if (!out) throw data_error("failed writing " + path);
}

inline BalancedFile read_signal_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header.front() != "time_s" || header.back() != "label")
    throw data_error(path + ":1: malformed header (want time_s,ch...,label)");
  const size_t n_channels = header.size() - 2;

  BalancedFile file;
  file.name = path;
  file.channels.resize(n_channels);
  std::vector<double> times;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t pos = 0, field = 0;
    double time = 0.0;
    while (true) {
      const size_t comma = line.find(',', pos);
      const std::string cell = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      char* endp = nullptr;
      const double v = std::strtod(cell.c_str(), &endp);
      if (endp == cell.c_str() || *endp != '\0')
        throw data_error(path + ":" + std::to_string(line_no) +
                         ": non-numeric cell '" + cell + "'");
      if (field == 0)
        time = v;
      else if (field <= n_channels)
        file.channels[field - 1].push_back(v);
      else if (field == n_channels + 1) {
        if (v != 0.0 && v != 1.0)
          throw data_error(path + ":" + std::to_string(line_no) +
                           ": label must be 0 or 1");
        file.labels.push_back(v != 0.0 ? 1 : 0);
      }
      ++field;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (field != n_channels + 2)
      throw data_error(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(n_channels + 2) + " fields, got " +
                       std::to_string(field));
    times.push_back(time);
  }
  if (times.empty()) throw data_error(path + ": no samples");
  if (times.size() >= 2) {
    const double dt = times[1] - times[0];
    if (dt <= 0.0) throw data_error(path + ": non-increasing time column");
    file.fs = std::round(1.0 / dt);
  }
  return file;
}

// ---------------------------------------------------------------------------
// Annotation sidecar JSON: {subject, fs, seizures: [{onset_s, offset_s}]}
// ---------------------------------------------------------------------------

inline nlohmann::json annotations_to_json(const Recording& rec) {
  nlohmann::json j;
  j["subject"] = rec.subject;
  j["fs"] = rec.fs;
  j["seizures"] = nlohmann::json::array();
  for (const SeizureSpan& s : rec.seizures)
    j["seizures"].push_back({{"onset_s", s.onset_s}, {"offset_s", s.offset_s}});
  return j;
}

/// Parse a sidecar and apply it to a recording loaded from CSV.
inline void apply_annotations(Recording& rec, const nlohmann::json& j,
                              const std::string& origin) {
  try {
    rec.subject = j.at("subject").get<std::string>();
    rec.fs = j.at("fs").get<double>();
    rec.seizures.clear();
    for (const auto& s : j.at("seizures"))
      rec.seizures.push_back(
          {s.at("onset_s").get<double>(), s.at("offset_s").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw data_error(origin + ": bad annotation sidecar: " + e.what());
  }
}

} // namespace hdseize
