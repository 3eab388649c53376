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
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hdseize/error.hpp"

namespace hdseize {

struct Scores {
  double tpr = 0.0;
  double ppv = 0.0;
  double f1 = 0.0;
};

/// F1 with the 0/0 convention fixed to 0.
inline double f1_score(double tpr, double ppv) {
  return tpr + ppv > 0.0 ? 2.0 * tpr * ppv / (tpr + ppv) : 0.0;
}

/// Window-by-window confusion counting.
inline Scores duration_scores(std::span<const uint8_t> pred,
                              std::span<const uint8_t> truth) {
  if (pred.size() != truth.size())
    throw config_error("duration_scores: length mismatch (" +
                       std::to_string(pred.size()) + " vs " +
                       std::to_string(truth.size()) + ")");
  uint64_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && truth[i]) ++tp;
    else if (pred[i] && !truth[i]) ++fp;
    else if (!pred[i] && truth[i]) ++fn;
  }
  Scores s;
  s.tpr = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.ppv = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.f1 = f1_score(s.tpr, s.ppv);
  return s;
}

/// Half-open index interval of a maximal positive run.
struct Episode {
  size_t begin = 0;
  size_t end = 0; // one past the last positive step

  bool overlaps(const Episode& other) const {
    return begin < other.end && other.begin < end;
  }
};

inline std::vector<Episode> extract_episodes(std::span<const uint8_t> labels) {
  std::vector<Episode> out;
  size_t i = 0;
  while (i < labels.size()) {
    if (!labels[i]) {
      ++i;
      continue;
    }
    Episode e{i, i};
    while (i < labels.size() && labels[i]) ++i;
    e.end = i;
    out.push_back(e);
  }
  return out;
}

/// Event-level scoring with any-overlap matching:
///  - a truth episode counts as detected iff at least one predicted episode
///    overlaps it by one step or more (sensitivity side);
///  - a predicted episode overlapping no truth episode is a false detection;
///  - for precision, overlapping predictions collapse: the unit is a
///    connected component of the bipartite overlap graph, so several
///    fragments detecting one truth episode count once, and one prediction
///    bridging several truth episodes also counts once.
/// TPR = detected / total truth episodes; PPV = components / (components +
/// false detections).
inline Scores episode_scores(std::span<const uint8_t> pred,
                             std::span<const uint8_t> truth) {
  if (pred.size() != truth.size())
    throw config_error("episode_scores: length mismatch (" +
                       std::to_string(pred.size()) + " vs " +
                       std::to_string(truth.size()) + ")");
  const std::vector<Episode> p = extract_episodes(pred);
  const std::vector<Episode> t = extract_episodes(truth);

  // Union-find over p (indices 0..) and t (indices |p|..) episodes.
  std::vector<size_t> parent(p.size() + t.size());
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](size_t a, size_t b) { parent[find(a)] = find(b); };

  std::vector<uint8_t> truth_detected(t.size(), 0);
  std::vector<uint8_t> pred_matched(p.size(), 0);
  // Episodes are sorted and disjoint within each sequence; a two-pointer
  // sweep finds every overlapping (prediction, truth) pair.
  size_t ti = 0;
  for (size_t pi = 0; pi < p.size(); ++pi) {
    while (ti < t.size() && t[ti].end <= p[pi].begin) ++ti;
    for (size_t tj = ti; tj < t.size() && t[tj].begin < p[pi].end; ++tj) {
      if (!p[pi].overlaps(t[tj])) continue;
      truth_detected[tj] = 1;
      pred_matched[pi] = 1;
      unite(pi, p.size() + tj);
    }
  }

  size_t detected = 0;
  for (uint8_t d : truth_detected) detected += d;
  size_t false_preds = 0;
  for (uint8_t m : pred_matched)
    if (!m) ++false_preds;

  // Count components that contain at least one matched prediction.
  std::vector<size_t> roots;
  for (size_t pi = 0; pi < p.size(); ++pi)
    if (pred_matched[pi]) roots.push_back(find(pi));
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  const size_t components = roots.size();

  Scores s;
  s.tpr = t.empty() ? 0.0
                    : static_cast<double>(detected) / static_cast<double>(t.size());
  s.ppv = components + false_preds > 0
              ? static_cast<double>(components) /
                    static_cast<double>(components + false_preds)
              : 0.0;
  s.f1 = f1_score(s.tpr, s.ppv);
  return s;
}

} // namespace hdseize
