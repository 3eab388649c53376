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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdseize/dataio.hpp"
#include "hdseize/encoders.hpp"
#include "hdseize/error.hpp"
#include "hdseize/pipeline.hpp"
#include "hdseize/postproc.hpp"
#include "hdseize/profiler.hpp"
#include "hdseize/report.hpp"
#include "hdseize/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum LogLevel { kLogError = 0, kLogWarn = 1, kLogInfo = 2, kLogDebug = 3 };

int g_log_level = kLogWarn;

void init_log_level() {
  const char* env = std::getenv("HDSEIZE_LOG");
  if (env == nullptr) return;
  const std::string v(env);
  if (v == "error") g_log_level = kLogError;
  else if (v == "warn") g_log_level = kLogWarn;
  else if (v == "info") g_log_level = kLogInfo;
  else if (v == "debug") g_log_level = kLogDebug;
}

void log(int level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= g_log_level)
    std::cerr << "[" << names[level] << "] " << msg << "\n";
}

struct Options {
  hdseize::EncoderConfig enc;
  hdseize::PostprocConfig post;
  std::string approach = "all";
  uint32_t jobs = 0; // 0 = hardware concurrency for evaluation
  bool channels_given = false;
};

std::vector<hdseize::Approach> parse_approach_list(const std::string& name) {
  std::vector<hdseize::Approach> list;
  if (name == "all") {
    list.assign(hdseize::kAllApproaches.begin(), hdseize::kAllApproaches.end());
  } else {
    size_t pos = 0;
    while (pos < name.size()) {
      const size_t comma = name.find(',', pos);
      const std::string one =
          name.substr(pos, comma == std::string::npos ? std::string::npos
                                                      : comma - pos);
      list.push_back(hdseize::parse_approach(one));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  return list;
}

/// Collect every configuration problem before giving up.
std::vector<std::string> validate_options(const Options& opt,
                                          const std::vector<hdseize::Approach>& list) {
  std::vector<std::string> problems;
  const auto& e = opt.enc;
  if (e.dim < hdseize::kMinRandomDim)
    problems.push_back("D must be at least 64, got " + std::to_string(e.dim));
  if (e.levels < 2) problems.push_back("L must be at least 2");
  if (e.levels > e.dim) problems.push_back("L must not exceed D");
  if (e.channels == 0) problems.push_back("channel count must be positive");
  if (e.fs <= 0.0) problems.push_back("sampling rate must be positive");
  if (e.w_len_s <= 0.0) problems.push_back("w_len must be positive");
  if (e.w_step_s <= 0.0) problems.push_back("w_step must be positive");
  if (opt.post.sw_len_s < e.w_step_s)
    problems.push_back("sw_len must be at least one w_step");
  if (opt.post.ds_min_s < 0.0) problems.push_back("ds_min must be non-negative");
  if (!(e.norm_lo_pct >= 0.0 && e.norm_lo_pct < e.norm_hi_pct &&
        e.norm_hi_pct <= 100.0))
    problems.push_back("normalization percentiles must satisfy 0 <= lo < hi <= 100");
  for (hdseize::Approach a : list)
    if (a == hdseize::Approach::kFft) {
      const uint32_t half = e.samples_per_window() / 2;
      if (e.bins == 0 || half == 0 || half % e.bins != 0)
        problems.push_back("B=" + std::to_string(e.bins) +
                           " must divide the positive-frequency bin count " +
                           std::to_string(half));
    }
  return problems;
}

/// Apply values from a JSON config file for keys not overridden on the
/// command line (`given` holds the flag names the user passed).
void apply_config_file(Options& opt, const json& j,
                       const std::map<std::string, bool>& given) {
  auto want = [&](const char* key) {
    auto it = given.find(key);
    return j.contains(key) && (it == given.end() || !it->second);
  };
  if (want("approach")) opt.approach = j["approach"].get<std::string>();
  if (want("D")) opt.enc.dim = j["D"].get<uint32_t>();
  if (want("L")) opt.enc.levels = j["L"].get<uint32_t>();
  if (want("B")) opt.enc.bins = j["B"].get<uint32_t>();
  if (want("C")) {
    opt.enc.channels = j["C"].get<uint32_t>();
    opt.channels_given = true;
  }
  if (want("w_len_s")) opt.enc.w_len_s = j["w_len_s"].get<double>();
  if (want("w_step_s")) opt.enc.w_step_s = j["w_step_s"].get<double>();
  if (want("fs")) opt.enc.fs = j["fs"].get<double>();
  if (want("seed")) opt.enc.master_seed = j["seed"].get<uint64_t>();
  if (want("norm_lo_pct")) opt.enc.norm_lo_pct = j["norm_lo_pct"].get<double>();
  if (want("norm_hi_pct")) opt.enc.norm_hi_pct = j["norm_hi_pct"].get<double>();
  if (j.contains("taper") && !given.at("taper"))
    opt.enc.taper = j["taper"].get<std::string>() == "rectangular"
                        ? hdseize::Taper::kRectangular
                        : hdseize::Taper::kHann;
  if (j.contains("postproc")) {
    const json& p = j["postproc"];
    if (p.contains("sw_len_s") && !given.at("sw_len"))
      opt.post.sw_len_s = p["sw_len_s"].get<double>();
    if (p.contains("ds_min_s") && !given.at("ds_min"))
      opt.post.ds_min_s = p["ds_min_s"].get<double>();
    if (p.contains("centered") && !given.at("centered"))
      opt.post.centered = p["centered"].get<bool>();
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hdseize::config_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw hdseize::data_error(path + ": " + e.what());
  }
  return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hdseize::data_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw hdseize::data_error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

hdseize::SynthSpec parse_synth_spec(const std::string& spec) {
  hdseize::SynthSpec s;
  size_t pos = 0;
  while (pos < spec.size()) {
    const size_t comma = spec.find(',', pos);
    const std::string pair = spec.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const size_t eq = pair.find('=');
    if (eq == std::string::npos)
      throw hdseize::config_error("--synth: expected key=value, got '" + pair + "'");
    const std::string key = pair.substr(0, eq);
    const std::string val = pair.substr(eq + 1);
    try {
      if (key == "n_seizures") s.n_seizures = static_cast<uint32_t>(std::stoul(val));
      else if (key == "channels") s.channels = static_cast<uint32_t>(std::stoul(val));
      else if (key == "fs") s.fs = std::stod(val);
      else if (key == "min_seizure_s") s.min_seizure_s = std::stod(val);
      else if (key == "max_seizure_s") s.max_seizure_s = std::stod(val);
      else if (key == "osc_amp_factor") s.osc_amp_factor = std::stod(val);
      else if (key == "subject") s.subject = val;
      else throw hdseize::config_error("--synth: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw hdseize::config_error("--synth: bad value for '" + key + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return s;
}

int cmd_prepare(const std::string& input_dir, const std::string& synth_spec,
                const std::string& out_dir, uint64_t seed) {
  if (input_dir.empty() == synth_spec.empty())
    throw hdseize::config_error(
        "prepare: give exactly one of --input <dir> or --synth <spec>");

  std::vector<hdseize::BalancedFile> files;
  json manifest;
  manifest["schema_version"] = hdseize::kReportSchemaVersion;
  manifest["tool"] = {{"name", hdseize::kToolName},
                      {"version", hdseize::kToolVersion}};
  manifest["seed"] = seed;

  if (!synth_spec.empty()) {
    const hdseize::SynthSpec spec = parse_synth_spec(synth_spec);
    files = hdseize::synth_subject(spec, seed);
    manifest["mode"] = "synth";
    manifest["synth"] = {{"n_seizures", spec.n_seizures},
                         {"channels", spec.channels},
                         {"fs", spec.fs},
                         {"min_seizure_s", spec.min_seizure_s},
                         {"max_seizure_s", spec.max_seizure_s},
                         {"osc_amp_factor", spec.osc_amp_factor},
                         {"subject", spec.subject}};
  } else {
    if (!fs::is_directory(input_dir))
      throw hdseize::config_error("prepare: input directory not found: " +
                                  input_dir);
    manifest["mode"] = "recorded";
    size_t n_recordings = 0;
    for (const auto& entry : fs::directory_iterator(input_dir)) {
      if (entry.path().extension() != ".csv") continue;
      fs::path sidecar = entry.path();
      sidecar.replace_extension(".json");
      if (!fs::exists(sidecar))
        throw hdseize::data_error("prepare: missing annotation sidecar " +
                                  sidecar.string());
      hdseize::BalancedFile raw = hdseize::read_signal_csv(entry.path().string());
      hdseize::Recording rec;
      rec.channels = std::move(raw.channels);
      hdseize::apply_annotations(rec, load_json_file(sidecar.string()),
                                 sidecar.string());
      if (rec.fs != raw.fs)
        log(kLogWarn, entry.path().string() + ": sidecar fs " +
                          std::to_string(rec.fs) + " != time column fs " +
                          std::to_string(raw.fs));
      rec = hdseize::resample(rec, hdseize::kTargetFs);
      auto balanced = hdseize::make_balanced_files(rec, seed);
      for (auto& f : balanced) files.push_back(std::move(f));
      ++n_recordings;
      log(kLogInfo, "prepared " + entry.path().string());
    }
    if (n_recordings == 0)
      throw hdseize::data_error("prepare: no .csv recordings in " + input_dir);
  }

  fs::create_directories(out_dir);
  manifest["files"] = json::array();
  for (const hdseize::BalancedFile& f : files) {
    const std::string csv_name = f.name + ".csv";
    hdseize::write_signal_csv((fs::path(out_dir) / csv_name).string(), f);
    manifest["files"].push_back(
        {{"name", f.name},
         {"csv", csv_name},
         {"subject", f.subject},
         {"fs", f.fs},
         {"samples", f.sample_count()},
         {"provenance",
          {{"source", f.provenance.source},
           {"ictal_onset_s", f.provenance.ictal_onset_s},
           {"ictal_offset_s", f.provenance.ictal_offset_s},
           {"interictal_start_s", f.provenance.interictal_start_s}}}});
  }
  write_text_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "prepared " << files.size() << " balanced file(s) in " << out_dir
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int cmd_evaluate(Options opt, const std::string& data_dir,
                 const std::string& out_dir, const std::string& registry_path) {
  const fs::path manifest_path = fs::path(data_dir) / "manifest.json";
  if (!fs::exists(manifest_path))
    throw hdseize::config_error("evaluate: no manifest.json in " + data_dir +
                                " (run prepare first)");
  const json manifest = load_json_file(manifest_path.string());

  std::map<std::string, std::vector<hdseize::BalancedFile>> by_subject;
  for (const auto& fj : manifest.at("files")) {
    hdseize::BalancedFile f = hdseize::read_signal_csv(
        (fs::path(data_dir) / fj.at("csv").get<std::string>()).string());
    f.name = fj.at("name").get<std::string>();
    f.subject = fj.at("subject").get<std::string>();
    f.fs = fj.at("fs").get<double>();
    f.validate();
    by_subject[f.subject].push_back(std::move(f));
  }
  if (by_subject.empty()) throw hdseize::data_error("evaluate: dataset is empty");

  const uint32_t data_channels =
      static_cast<uint32_t>(by_subject.begin()->second.front().channels.size());
  if (!opt.channels_given) {
    opt.enc.channels = data_channels;
  } else if (opt.enc.channels != data_channels) {
    throw hdseize::config_error("evaluate: config says C=" +
                                std::to_string(opt.enc.channels) +
                                " but the dataset has " +
                                std::to_string(data_channels) + " channels");
  }

  const std::vector<hdseize::Approach> approaches =
      parse_approach_list(opt.approach);
  const std::vector<std::string> problems = validate_options(opt, approaches);
  if (!problems.empty()) {
    for (const std::string& p : problems) std::cerr << "config error: " << p << "\n";
    return 2;
  }

  uint32_t jobs = opt.jobs;
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

  // A custom registry pins the exact 45-feature definition; the 3-feature
  // set is fixed.
  std::optional<hdseize::FeatureRegistry> registry45;
  if (!registry_path.empty()) {
    registry45 =
        hdseize::FeatureRegistry::from_json(load_json_file(registry_path));
    if (registry45->size() != 45)
      throw hdseize::config_error("--registry must define exactly 45 features, "
                                  "got " + std::to_string(registry45->size()));
  }

  std::vector<hdseize::SubjectResult> results;
  bool used_feat45 = false;
  for (hdseize::Approach a : approaches) {
    hdseize::EncoderConfig cfg = opt.enc;
    cfg.approach = a;
    const hdseize::FeatureRegistry* reg =
        a == hdseize::Approach::kFeat45 && registry45 ? &*registry45 : nullptr;
    used_feat45 = used_feat45 || a == hdseize::Approach::kFeat45;
    for (const auto& [subject, files] : by_subject) {
      log(kLogInfo, std::string("evaluate ") + hdseize::to_string(a) + " on " +
                        subject + " (" + std::to_string(files.size()) +
                        " folds)");
      try {
        results.push_back(hdseize::run_loocv(files, cfg, opt.post, reg, jobs));
      } catch (const std::exception& e) {
        throw hdseize::data_error(std::string("evaluate: ") +
                                  hdseize::to_string(a) + "/" + subject + ": " +
                                  e.what());
      }
    }
  }

  hdseize::ReportJson dataset_info = {{"data_dir", data_dir},
                                      {"subjects", by_subject.size()},
                                      {"files", manifest.at("files").size()}};
  hdseize::ReportJson report =
      hdseize::build_report(results, opt.enc, opt.post, dataset_info);
  if (used_feat45)
    report["config"]["registry_45"] = hdseize::ReportJson(
        registry45 ? registry45->to_json()
                   : hdseize::FeatureRegistry::default_45().to_json());

  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
  write_text_file(fs::path(out_dir) / "summary.csv",
                  hdseize::summary_csv(results));

  for (const hdseize::SubjectResult& r : results) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%-8s %-8s merged episode F1 %.3f, merged duration F1 %.3f\n",
                  r.subject.c_str(), hdseize::to_string(r.approach),
                  r.mean_merged.episode.f1, r.mean_merged.duration.f1);
    std::cout << buf;
  }
  std::cout << "report: " << (fs::path(out_dir) / "report.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

int cmd_profile(Options opt, const std::string& preset, bool with_timing,
                uint32_t timing_windows, const std::string& out_file) {
  hdseize::EncoderConfig cfg = opt.enc;
  if (!preset.empty()) {
    if (preset == "table-one") {
      cfg = hdseize::table_one_config();
    } else if (preset == "eeg-18") {
      cfg = hdseize::eeg18_config();
    } else {
      throw hdseize::config_error("unknown preset '" + preset +
                                  "' (available: table-one, eeg-18)");
    }
    cfg.master_seed = opt.enc.master_seed;
  }
  hdseize::ProfileOptions popt;
  popt.with_timing = with_timing;
  popt.timing_windows = timing_windows;
  popt.seed = cfg.master_seed;
  popt.preset = preset;
  const std::string csv = hdseize::profile_csv(cfg, popt);
  if (out_file.empty())
    std::cout << csv;
  else
    write_text_file(out_file, csv);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  init_log_level();
  CLI::App app{"Binary hypervector encoding benchmark for seizure detection"};
  app.set_version_flag("--version", std::string(hdseize::kToolName) + " " +
                                        hdseize::kToolVersion);
  app.require_subcommand(1);

  Options opt;
  std::string config_path;

  // prepare
  auto* prepare = app.add_subcommand(
      "prepare", "Build balanced per-seizure files from recordings or synthesis");
  std::string input_dir, synth_spec, prepare_out;
  prepare->add_option("--input", input_dir, "Directory of recording CSVs + JSON sidecars");
  prepare->add_option("--synth", synth_spec,
                      "Synthetic spec, e.g. n_seizures=4,channels=16");
  prepare->add_option("--seed", opt.enc.master_seed, "Master seed");
  prepare->add_option("output", prepare_out, "Output directory")->required();

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Leave-one-seizure-out evaluation on a prepared dataset");
  std::string data_dir, eval_out = ".", registry_path;
  evaluate->add_option("--data", data_dir, "Prepared dataset directory")->required();
  evaluate->add_option("--out", eval_out, "Output directory for report.json/summary.csv");
  evaluate->add_option("--config", config_path, "JSON config file");
  evaluate->add_option("--registry", registry_path,
                       "JSON file pinning the 45-feature definitions (45Feat)");
  evaluate->add_option("--approach", opt.approach,
                       "Approach name, comma list, or 'all'");
  evaluate->add_option("--seed", opt.enc.master_seed, "Master seed");
  evaluate->add_option("--jobs", opt.jobs, "Parallel workers (0 = all cores)");
  evaluate->add_option("--dim", opt.enc.dim, "Hypervector dimension D");
  evaluate->add_option("--levels", opt.enc.levels, "Value levels L");
  evaluate->add_option("--bins", opt.enc.bins, "Spectrum bins B");
  auto* chan_opt = evaluate->add_option("--channels", opt.enc.channels,
                                        "Channel count C (default: from data)");
  evaluate->add_option("--w-len", opt.enc.w_len_s, "Window length (s)");
  evaluate->add_option("--w-step", opt.enc.w_step_s, "Window step (s)");
  evaluate->add_option("--sw-len", opt.post.sw_len_s, "Voting window (s)")
      ->group("Post-processing");
  evaluate->add_option("--ds-min", opt.post.ds_min_s, "Merge gaps shorter than (s)")
      ->group("Post-processing");
  evaluate->add_flag("--centered", opt.post.centered,
                     "Centered instead of trailing voting window")
      ->group("Post-processing");
  std::string taper = "hann";
  evaluate->add_option("--taper", taper, "Spectral taper: hann|rectangular");

  // profile
  auto* profile = app.add_subcommand(
      "profile", "Emit the memory/op-count complexity table (optionally timed)");
  std::string preset, profile_out;
  bool with_timing = false;
  uint32_t timing_windows = 1000;
  profile->add_option("--preset", preset, "Configuration preset (table-one)");
  profile->add_option("--out", profile_out, "Write CSV here instead of stdout");
  profile->add_flag("--time", with_timing,
                    "Measure per-window feature/vector timing");
  profile->add_option("--timing-windows", timing_windows,
                      "Windows per timing run (default 1000)");
  profile->add_option("--seed", opt.enc.master_seed, "Master seed");
  profile->add_option("--dim", opt.enc.dim, "Hypervector dimension D");
  profile->add_option("--channels", opt.enc.channels, "Channel count C");
  profile->add_option("--levels", opt.enc.levels, "Value levels L");
  profile->add_option("--bins", opt.enc.bins, "Spectrum bins B");
  profile->add_option("--w-len", opt.enc.w_len_s, "Window length (s)");
  profile->add_option("--fs", opt.enc.fs, "Sampling rate (Hz)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (prepare->parsed())
      return cmd_prepare(input_dir, synth_spec, prepare_out, opt.enc.master_seed);

    if (evaluate->parsed()) {
      opt.enc.taper = taper == "rectangular" ? hdseize::Taper::kRectangular
                                             : hdseize::Taper::kHann;
      opt.channels_given = chan_opt->count() > 0;
      if (!config_path.empty()) {
        std::map<std::string, bool> given = {
            {"approach", evaluate->count("--approach") > 0},
            {"D", evaluate->count("--dim") > 0},
            {"L", evaluate->count("--levels") > 0},
            {"B", evaluate->count("--bins") > 0},
            {"C", evaluate->count("--channels") > 0},
            {"w_len_s", evaluate->count("--w-len") > 0},
            {"w_step_s", evaluate->count("--w-step") > 0},
            {"fs", false},
            {"seed", evaluate->count("--seed") > 0},
            {"norm_lo_pct", false},
            {"norm_hi_pct", false},
            {"taper", evaluate->count("--taper") > 0},
            {"sw_len", evaluate->count("--sw-len") > 0},
            {"ds_min", evaluate->count("--ds-min") > 0},
            {"centered", evaluate->count("--centered") > 0},
        };
        apply_config_file(opt, load_json_file(config_path), given);
      }
      return cmd_evaluate(std::move(opt), data_dir, eval_out, registry_path);
    }

    if (profile->parsed())
      return cmd_profile(opt, preset, with_timing, timing_windows, profile_out);
  } catch (const hdseize::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
