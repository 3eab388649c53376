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

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdseize/encoders.hpp"
#include "hdseize/pipeline.hpp"
#include "hdseize/postproc.hpp"
#include "hdseize/profiler.hpp"
#include "hdseize/version.hpp"

namespace hdseize {

// Reports use insertion-ordered JSON so the serialized stages always appear
// raw -> smoothed -> merged and the config echo reads naturally.
using ReportJson = nlohmann::ordered_json;

inline ReportJson to_json(const Scores& s) {
  return {{"tpr", s.tpr}, {"ppv", s.ppv}, {"f1", s.f1}};
}

inline ReportJson to_json(const StageScores& s) {
  return {{"episode", to_json(s.episode)}, {"duration", to_json(s.duration)}};
}

inline ReportJson stages_json(const StageScores& raw, const StageScores& smoothed,
                              const StageScores& merged) {
  ReportJson j;
  j["raw"] = to_json(raw);
  j["smoothed"] = to_json(smoothed);
  j["merged"] = to_json(merged);
  return j;
}

inline ReportJson to_json(const EncoderConfig& cfg) {
  ReportJson j;
  j["approach"] = to_string(cfg.approach);
  j["D"] = cfg.dim;
  j["L"] = cfg.levels;
  j["B"] = cfg.bins;
  j["C"] = cfg.channels;
  j["w_len_s"] = cfg.w_len_s;
  j["w_step_s"] = cfg.w_step_s;
  j["train_step_s"] = cfg.train_step();
  j["fs"] = cfg.fs;
  j["taper"] = to_string(cfg.taper);
  j["seed"] = cfg.master_seed;
  j["norm_lo_pct"] = cfg.norm_lo_pct;
  j["norm_hi_pct"] = cfg.norm_hi_pct;
  return j;
}

inline ReportJson to_json(const PostprocConfig& p) {
  return {{"sw_len_s", p.sw_len_s},
          {"ds_min_s", p.ds_min_s},
          {"centered", p.centered}};
}

inline ReportJson to_json(const SubjectResult& r, const EncoderConfig& cfg) {
  ReportJson j;
  j["subject"] = r.subject;
  j["approach"] = to_string(r.approach);
  j["n_files"] = r.n_files;
  j["folds"] = ReportJson::array();
  for (const FoldResult& f : r.folds) {
    ReportJson fj;
    fj["held_out"] = f.held_out;
    fj["n_test_windows"] = f.n_test_windows;
    fj["stages"] = stages_json(f.raw, f.smoothed, f.merged);
    j["folds"].push_back(std::move(fj));
  }
  j["mean"] = stages_json(r.mean_raw, r.mean_smoothed, r.mean_merged);
  j["complexity"] = {
      {"memory_factor_of_D", memory_factor(r.approach, cfg)},
      {"op_count_model", op_count(r.approach, cfg)},
      {"xor_ops_measured", r.ops_per_window.xor_ops},
      {"sum_ops_measured", r.ops_per_window.sum_ops},
  };
  return j;
}

/// Full evaluation report. Self-describing: embeds the exact configuration
/// and master seed, so re-running with the embedded config reproduces the
/// numeric payload of "results" bit for bit. Wall-clock measurements live in
/// the separate "timing" section, which is excluded from that guarantee.
inline ReportJson build_report(const std::vector<SubjectResult>& results,
                               const EncoderConfig& base_cfg,
                               const PostprocConfig& post,
                               const ReportJson& dataset_info) {
  ReportJson j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["config"] = to_json(base_cfg);
  j["config"]["postproc"] = to_json(post);
  j["dataset"] = dataset_info;
  j["results"] = ReportJson::array();
  j["timing"] = ReportJson::array();
  for (const SubjectResult& r : results) {
    EncoderConfig cfg = base_cfg;
    cfg.approach = r.approach;
    j["results"].push_back(to_json(r, cfg));
    j["timing"].push_back({{"subject", r.subject},
                           {"approach", to_string(r.approach)},
                           {"feature_ms_per_window", r.feature_ms_per_window},
                           {"hdvec_ms_per_window", r.hd_ms_per_window}});
  }
  return j;
}

/// Flat CSV summary, one row per (subject, approach, stage, level).
inline std::string summary_csv(const std::vector<SubjectResult>& results) {
  std::string out = "subject,approach,stage,level,tpr,ppv,f1\n";
  char buf[256];
  for (const SubjectResult& r : results) {
    const std::pair<const char*, const StageScores*> stages[] = {
        {"raw", &r.mean_raw}, {"smoothed", &r.mean_smoothed},
        {"merged", &r.mean_merged}};
    for (const auto& [stage, scores] : stages) {
      const std::pair<const char*, const Scores*> levels[] = {
          {"episode", &scores->episode}, {"duration", &scores->duration}};
      for (const auto& [level, s] : levels) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%.6f,%.6f,%.6f\n",
                      r.subject.c_str(), to_string(r.approach), stage, level,
                      s->tpr, s->ppv, s->f1);
        out += buf;
      }
    }
  }
  return out;
}

} // namespace hdseize
