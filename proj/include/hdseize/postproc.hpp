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
#include <string>
#include <vector>

#include "hdseize/error.hpp"

namespace hdseize {

/// Per-window binary labels with their time step in seconds.
struct LabelSequence {
  std::vector<uint8_t> labels;
  double step_s = 0.5;

  size_t size() const { return labels.size(); }
};

struct PostprocConfig {
  double sw_len_s = 5.0;  // voting window
  double ds_min_s = 30.0; // minimum gap kept between detections
  bool centered = false;  // trailing (causal) voting by default
};

/// Majority voting over a moving window of k = round(sw_len / step) labels.
/// Causal by default: the window trails the current step, and shortened
/// prefix windows vote over the labels actually available (no padding).
/// Ties go to 0. With `centered`, the window is centered on the current step
/// and clipped at both ends.
inline LabelSequence majority_smooth(const LabelSequence& seq, double sw_len_s,
                                     bool centered = false) {
  if (seq.labels.empty()) return seq;
  if (seq.step_s <= 0.0)
    throw config_error("majority_smooth: step must be positive");
  if (sw_len_s < seq.step_s)
    throw config_error("majority_smooth: voting window shorter than one step");
  const auto k =
      static_cast<size_t>(std::llround(sw_len_s / seq.step_s));
  const size_t n = seq.labels.size();
  LabelSequence out{std::vector<uint8_t>(n, 0), seq.step_s};
  for (size_t t = 0; t < n; ++t) {
    size_t begin, end; // [begin, end)
    if (centered) {
      const size_t before = k / 2;
      begin = t >= before ? t - before : 0;
      end = std::min(n, begin + k);
    } else {
      begin = t + 1 >= k ? t + 1 - k : 0;
      end = t + 1;
    }
    size_t ones = 0;
    for (size_t i = begin; i < end; ++i) ones += seq.labels[i];
    out.labels[t] = ones * 2 > (end - begin) ? 1 : 0;
  }
  return out;
}

/// Flip every maximal zero gap strictly shorter than ds_min between two
/// positive segments to 1. Gaps only disappear, so a single left-to-right
/// pass is already the fixpoint; the operation is idempotent.
inline LabelSequence merge_close(const LabelSequence& seq, double ds_min_s) {
  if (seq.labels.empty()) return seq;
  if (seq.step_s <= 0.0)
    throw config_error("merge_close: step must be positive");
  LabelSequence out = seq;
  const size_t n = out.labels.size();
  size_t prev_end = n; // one past the end of the previous positive segment
  size_t i = 0;
  while (i < n) {
    if (out.labels[i] == 0) {
      ++i;
      continue;
    }
    const size_t start = i;
    while (i < n && out.labels[i] == 1) ++i;
    if (prev_end != n && start > prev_end) {
      const double gap_s = static_cast<double>(start - prev_end) * out.step_s;
      if (gap_s < ds_min_s)
        for (size_t j = prev_end; j < start; ++j) out.labels[j] = 1;
    }
    prev_end = i;
  }
  return out;
}

} // namespace hdseize
