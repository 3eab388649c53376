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

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hdseize/dataio.hpp"
#include "hdseize/encoders.hpp"
#include "hdseize/error.hpp"
#include "hdseize/hypervector.hpp"
#include "hdseize/metrics.hpp"
#include "hdseize/postproc.hpp"

namespace hdseize {

enum class SeizureLabel : uint8_t { kInterictal = 0, kIctal = 1 };

/// Two-class model: one bundled vector per class plus the accumulators they
/// came from, so training can continue or merge across workers.
struct ClassPrototypes {
  BundleAccumulator ictal_acc;
  BundleAccumulator interictal_acc;
  Hypervector ictal;
  Hypervector interictal;
};

inline ClassPrototypes finalize_prototypes(BundleAccumulator ictal_acc,
                                           BundleAccumulator interictal_acc) {
  if (ictal_acc.size() == 0)
    throw data_error("train: no ictal windows in the training set");
  if (interictal_acc.size() == 0)
    throw data_error("train: no interictal windows in the training set");
  ClassPrototypes p{std::move(ictal_acc), std::move(interictal_acc), {}, {}};
  p.ictal = p.ictal_acc.finalize();
  p.interictal = p.interictal_acc.finalize();
  return p;
}

/// Majority-bundle one prototype per class from labeled window vectors.
inline ClassPrototypes train(std::span<const Hypervector> windows,
                             std::span<const uint8_t> labels) {
  if (windows.size() != labels.size())
    throw config_error("train: window/label count mismatch");
  if (windows.empty()) throw config_error("train: empty training set");
  BundleAccumulator ictal(windows.front().dim());
  BundleAccumulator interictal(windows.front().dim());
  for (size_t i = 0; i < windows.size(); ++i)
    (labels[i] ? ictal : interictal).add(windows[i]);
  return finalize_prototypes(std::move(ictal), std::move(interictal));
}

/// Nearest prototype by Hamming distance; an exact tie goes to ictal
/// (post-processing removes isolated positives, so favoring sensitivity on a
/// probability-zero event costs nothing).
inline SeizureLabel classify(const Hypervector& window,
                             const ClassPrototypes& prototypes) {
  const uint32_t d_ictal = hamming_bits(window, prototypes.ictal);
  const uint32_t d_inter = hamming_bits(window, prototypes.interictal);
  return d_ictal <= d_inter ? SeizureLabel::kIctal : SeizureLabel::kInterictal;
}

// ---------------------------------------------------------------------------
// Windowing
// ---------------------------------------------------------------------------

/// Slice a balanced file into windows of w_len at the given stride. A window
/// is labeled ictal iff more than half of its samples are ictal.
inline std::vector<WindowRecord> slice_windows(const BalancedFile& file,
                                               double w_len_s, double step_s) {
  if (w_len_s <= 0.0 || step_s <= 0.0)
    throw config_error("slice_windows: window and step must be positive");
  const auto S = static_cast<size_t>(std::llround(w_len_s * file.fs));
  const size_t total = file.sample_count();
  if (S == 0 || S > total)
    throw data_error(file.name + ": too short for one " +
                     std::to_string(w_len_s) + " s window");
  std::vector<WindowRecord> windows;
  for (size_t k = 0;; ++k) {
    const auto start =
        static_cast<size_t>(std::llround(static_cast<double>(k) * step_s * file.fs));
    if (start + S > total) break;
    WindowRecord w;
    w.fs = file.fs;
    w.start_s = static_cast<double>(start) / file.fs;
    w.samples.reserve(file.channels.size());
    for (const auto& ch : file.channels)
      w.samples.emplace_back(ch.begin() + static_cast<long>(start),
                             ch.begin() + static_cast<long>(start + S));
    size_t ictal = 0;
    for (size_t i = start; i < start + S; ++i) ictal += file.labels[i];
    w.label = ictal * 2 > S ? 1 : 0;
    windows.push_back(std::move(w));
  }
  return windows;
}

// ---------------------------------------------------------------------------
// Leave-one-seizure-out cross-validation
// ---------------------------------------------------------------------------

struct FoldPlan {
  std::vector<uint32_t> train_files;
  uint32_t held_out = 0;
};

/// One fold per file; every file is held out exactly once and never appears
/// in its own training list.
inline std::vector<FoldPlan> make_fold_plans(uint32_t n_files) {
  if (n_files < 2)
    throw config_error("leave-one-out: need at least 2 files, got " +
                       std::to_string(n_files));
  std::vector<FoldPlan> plans(n_files);
  for (uint32_t held = 0; held < n_files; ++held) {
    plans[held].held_out = held;
    for (uint32_t f = 0; f < n_files; ++f)
      if (f != held) plans[held].train_files.push_back(f);
  }
  return plans;
}

struct StageScores {
  Scores episode;
  Scores duration;
};

struct FoldResult {
  uint32_t held_out = 0;
  uint32_t n_test_windows = 0;
  StageScores raw;
  StageScores smoothed;
  StageScores merged;
};

struct SubjectResult {
  std::string subject;
  Approach approach = Approach::kAmpl;
  std::vector<FoldResult> folds;
  StageScores mean_raw;
  StageScores mean_smoothed;
  StageScores mean_merged;
  OpCounter ops_per_window; // identical for every window of a session
  uint32_t n_files = 0;
  // Wall-clock means over all encoded windows; informational only and kept
  // out of the deterministic result payload.
  double feature_ms_per_window = 0.0;
  double hd_ms_per_window = 0.0;
};

namespace detail {

/// Everything derived from one balanced file once per session: encoded
/// window vectors, their labels, and per-class accumulators for training.
struct EncodedFile {
  std::vector<Hypervector> window_hvs;
  std::vector<uint8_t> window_labels;
  BundleAccumulator ictal_acc;
  BundleAccumulator interictal_acc;
  OpCounter ops_per_window;
  double feat_ns = 0.0;
  double hd_ns = 0.0;
  uint64_t timed_windows = 0;
};

/// Robust per-file range of the raw signal, pooled over channels.
inline ValueRange estimate_signal_range(const BalancedFile& file,
                                        const EncoderConfig& cfg) {
  std::vector<double> pool;
  pool.reserve(file.sample_count() * file.channels.size());
  for (const auto& ch : file.channels)
    pool.insert(pool.end(), ch.begin(), ch.end());
  return robust_range(std::move(pool), cfg.norm_lo_pct, cfg.norm_hi_pct);
}

inline NormalizationRanges estimate_ranges(
    ValueRange signal_range, const std::vector<WindowValues>& values,
    const EncoderConfig& cfg, const FeatureRegistry* registry) {
  NormalizationRanges ranges;
  ranges.signal = signal_range;
  if (cfg.approach == Approach::kFft) {
    std::vector<double> pool;
    for (const auto& w : values)
      for (const auto& ch : w.values) pool.insert(pool.end(), ch.begin(), ch.end());
    ranges.per_feature.push_back(
        robust_range(std::move(pool), cfg.norm_lo_pct, cfg.norm_hi_pct));
  } else if (const uint32_t F = feature_count(cfg.approach); F > 0) {
    for (uint32_t f = 0; f < F; ++f) {
      if (registry != nullptr && registry->at(f).fixed_range) {
        ranges.per_feature.push_back(*registry->at(f).fixed_range);
        continue;
      }
      std::vector<double> pool;
      pool.reserve(values.size() * cfg.channels);
      for (const auto& w : values)
        for (const auto& ch : w.values) pool.push_back(ch[f]);
      ranges.per_feature.push_back(
          robust_range(std::move(pool), cfg.norm_lo_pct, cfg.norm_hi_pct));
    }
  }
  return ranges;
}

inline EncodedFile encode_file(const BalancedFile& file,
                               const EncoderConfig& cfg,
                               const MemorySet& memories,
                               const FeatureRegistry* registry) {
  using clock = std::chrono::steady_clock;
  EncodedFile out{std::vector<Hypervector>{}, std::vector<uint8_t>{},
                  BundleAccumulator(cfg.dim), BundleAccumulator(cfg.dim),
                  OpCounter{}, 0.0, 0.0, 0};
  const std::vector<WindowRecord> windows =
      slice_windows(file, cfg.w_len_s, cfg.w_step_s);
  ValueRange signal_range{0.0, 1.0};
  if (cfg.approach != Approach::kLbp)
    signal_range = estimate_signal_range(file, cfg);

  auto compute_values = [&](const std::vector<WindowRecord>& ws) {
    const auto t0 = clock::now();
    std::vector<WindowValues> values;
    values.reserve(ws.size());
    for (const WindowRecord& w : ws)
      values.push_back(window_values(w, cfg, registry, signal_range));
    out.feat_ns += std::chrono::duration<double, std::nano>(clock::now() - t0)
                       .count();
    return values;
  };

  const std::vector<WindowValues> values = compute_values(windows);
  // Ranges come from the evaluation-stride windows; a coarser training
  // stride reuses them.
  const NormalizationRanges ranges =
      estimate_ranges(signal_range, values, cfg, registry);

  auto encode_one = [&](const WindowValues& vals) {
    const auto t0 = clock::now();
    const WindowSymbols symbols = quantize_values(vals, cfg, ranges);
    const auto t1 = clock::now();
    EncodedWindow enc = encode_symbols(symbols, memories, cfg);
    const auto t2 = clock::now();
    out.feat_ns += std::chrono::duration<double, std::nano>(t1 - t0).count();
    out.hd_ns += std::chrono::duration<double, std::nano>(t2 - t1).count();
    ++out.timed_windows;
    return enc;
  };

  out.window_hvs.reserve(windows.size());
  out.window_labels.reserve(windows.size());
  const bool shared_stride = cfg.train_step() == cfg.w_step_s;
  for (size_t i = 0; i < windows.size(); ++i) {
    EncodedWindow enc = encode_one(values[i]);
    out.ops_per_window = enc.ops;
    if (shared_stride)
      (windows[i].label ? out.ictal_acc : out.interictal_acc).add(enc.hv);
    out.window_hvs.push_back(std::move(enc.hv));
    out.window_labels.push_back(windows[i].label);
  }
  if (!shared_stride) {
    const std::vector<WindowRecord> train_windows =
        slice_windows(file, cfg.w_len_s, cfg.train_step());
    const std::vector<WindowValues> train_values = compute_values(train_windows);
    for (size_t i = 0; i < train_windows.size(); ++i) {
      const EncodedWindow enc = encode_one(train_values[i]);
      (train_windows[i].label ? out.ictal_acc : out.interictal_acc).add(enc.hv);
    }
  }
  return out;
}

} // namespace detail

/// Full personalized evaluation: one leave-one-seizure-out fold per balanced
/// file, scores at episode and duration level for the raw, smoothed, and
/// merged prediction stages, averaged over folds. Window vectors depend only
/// on their own file (per-file normalization), so files are encoded once and
/// folds reuse the per-file accumulators; held-out windows never enter the
/// training accumulators by construction.
inline SubjectResult run_loocv(std::span<const BalancedFile> files,
                               const EncoderConfig& cfg,
                               const PostprocConfig& post,
                               const FeatureRegistry* registry = nullptr,
                               uint32_t jobs = 1) {
  if (files.size() < 2)
    throw config_error("run_loocv: need at least 2 balanced files, got " +
                       std::to_string(files.size()));
  for (const BalancedFile& f : files) {
    f.validate();
    if (f.channels.size() != cfg.channels)
      throw config_error("run_loocv: file " + f.name + " has " +
                         std::to_string(f.channels.size()) +
                         " channels, config says " + std::to_string(cfg.channels));
  }
  const MemorySet memories = MemorySet::build(cfg);
  std::shared_ptr<const FeatureRegistry> owned;
  if (registry == nullptr && is_multi_feature(cfg.approach)) {
    owned = std::make_shared<FeatureRegistry>(
        cfg.approach == Approach::kFeat3 ? FeatureRegistry::three()
                                         : FeatureRegistry::default_45());
    registry = owned.get();
  }

  // Encode every file once (parallel when jobs > 1).
  std::vector<detail::EncodedFile> encoded(files.size(),
                                           detail::EncodedFile{
                                               {}, {}, BundleAccumulator(cfg.dim),
                                               BundleAccumulator(cfg.dim), {}});
  if (jobs > 1) {
    std::vector<std::future<void>> tasks;
    std::atomic<size_t> next{0};
    const uint32_t workers = std::min<uint32_t>(jobs, files.size());
    for (uint32_t t = 0; t < workers; ++t)
      tasks.push_back(std::async(std::launch::async, [&]() {
        for (size_t i = next.fetch_add(1); i < files.size();
             i = next.fetch_add(1))
          encoded[i] = detail::encode_file(files[i], cfg, memories, registry);
      }));
    for (auto& t : tasks) t.get();
  } else {
    for (size_t i = 0; i < files.size(); ++i)
      encoded[i] = detail::encode_file(files[i], cfg, memories, registry);
  }

  SubjectResult result;
  result.subject = files.front().subject;
  result.approach = cfg.approach;
  result.n_files = static_cast<uint32_t>(files.size());
  result.ops_per_window = encoded.front().ops_per_window;
  {
    double feat_ns = 0.0, hd_ns = 0.0;
    uint64_t n = 0;
    for (const detail::EncodedFile& f : encoded) {
      feat_ns += f.feat_ns;
      hd_ns += f.hd_ns;
      n += f.timed_windows;
    }
    if (n > 0) {
      result.feature_ms_per_window = feat_ns / 1e6 / static_cast<double>(n);
      result.hd_ms_per_window = hd_ns / 1e6 / static_cast<double>(n);
    }
  }

  const auto plans = make_fold_plans(static_cast<uint32_t>(files.size()));
  auto add_stage = [](StageScores& mean, const StageScores& s, double w) {
    mean.episode.tpr += w * s.episode.tpr;
    mean.episode.ppv += w * s.episode.ppv;
    mean.episode.f1 += w * s.episode.f1;
    mean.duration.tpr += w * s.duration.tpr;
    mean.duration.ppv += w * s.duration.ppv;
    mean.duration.f1 += w * s.duration.f1;
  };

  auto run_fold = [&](const FoldPlan& plan) {
    BundleAccumulator ictal(cfg.dim);
    BundleAccumulator interictal(cfg.dim);
    for (uint32_t f : plan.train_files) {
      ictal.merge(encoded[f].ictal_acc);
      interictal.merge(encoded[f].interictal_acc);
    }
    const ClassPrototypes prototypes =
        finalize_prototypes(std::move(ictal), std::move(interictal));

    const detail::EncodedFile& held = encoded[plan.held_out];
    LabelSequence pred{std::vector<uint8_t>(held.window_hvs.size(), 0),
                       cfg.w_step_s};
    for (size_t i = 0; i < held.window_hvs.size(); ++i)
      pred.labels[i] = classify(held.window_hvs[i], prototypes) ==
                               SeizureLabel::kIctal
                           ? 1
                           : 0;
    const std::span<const uint8_t> truth(held.window_labels);

    FoldResult fold;
    fold.held_out = plan.held_out;
    fold.n_test_windows = static_cast<uint32_t>(pred.labels.size());
    const LabelSequence smoothed =
        majority_smooth(pred, post.sw_len_s, post.centered);
    const LabelSequence merged = merge_close(smoothed, post.ds_min_s);
    fold.raw = {episode_scores(pred.labels, truth),
                duration_scores(pred.labels, truth)};
    fold.smoothed = {episode_scores(smoothed.labels, truth),
                     duration_scores(smoothed.labels, truth)};
    fold.merged = {episode_scores(merged.labels, truth),
                   duration_scores(merged.labels, truth)};
    return fold;
  };

  for (const FoldPlan& plan : plans) {
    try {
      result.folds.push_back(run_fold(plan));
    } catch (const std::exception& e) {
      throw data_error("fold " + std::to_string(plan.held_out) + " (held out " +
                       files[plan.held_out].name + "): " + e.what());
    }
  }

  const double w = 1.0 / static_cast<double>(result.folds.size());
  for (const FoldResult& fold : result.folds) {
    add_stage(result.mean_raw, fold.raw, w);
    add_stage(result.mean_smoothed, fold.smoothed, w);
    add_stage(result.mean_merged, fold.merged, w);
  }
  return result;
}

} // namespace hdseize
