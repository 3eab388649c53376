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

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hdseize/error.hpp"
#include "hdseize/features.hpp"
#include "hdseize/seeds.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output; // stdout + stderr
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(HDSEIZE_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  std::array<char, 4096> buf;
  while (fgets(buf.data(), buf.size(), pipe) != nullptr) r.output += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "hdseize_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("prepare --synth writes balanced files and a manifest") {
  const fs::path out = fresh_dir("prep");
  const CliResult r = run_cli(
      "prepare --synth n_seizures=3,channels=2,min_seizure_s=5,max_seizure_s=7 "
      "--seed 5 " +
      out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "manifest.json"));
  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest.at("files").size() == 3);
  CHECK(manifest.at("seed") == 5);
  for (const auto& f : manifest.at("files"))
    CHECK(fs::exists(out / f.at("csv").get<std::string>()));
}

TEST_CASE("prepare is byte-identical when re-run with one seed") {
  const fs::path out1 = fresh_dir("rep1");
  const fs::path out2 = fresh_dir("rep2");
  const std::string spec =
      "prepare --synth n_seizures=2,channels=2,min_seizure_s=5,max_seizure_s=6 "
      "--seed 9 ";
  CHECK(run_cli(spec + out1.string()).exit_code == 0);
  CHECK(run_cli(spec + out2.string()).exit_code == 0);
  for (const auto& entry : fs::directory_iterator(out1)) {
    const fs::path other = out2 / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
  }
}

TEST_CASE("prepare with a missing input directory exits with code 2") {
  const fs::path out = fresh_dir("missing");
  const CliResult r =
      run_cli("prepare --input /no/such/dir " + out.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("/no/such/dir") != std::string::npos);
}

TEST_CASE("prepare requires exactly one source") {
  const fs::path out = fresh_dir("nosrc");
  CHECK(run_cli("prepare " + out.string()).exit_code == 2);
}

TEST_CASE("profile --preset table-one emits the expected columns") {
  const CliResult r = run_cli("profile --preset table-one");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("memory_factor_of_D,36,36,36,23,65,84,36,80") !=
        std::string::npos);
  CHECK(r.output.find("xor_sum_ops_per_window,32,32,32,112,1456,2064,33792,"
                      "33792") != std::string::npos);
}

TEST_CASE("profile rejects unknown presets, listing the known ones") {
  const CliResult r = run_cli("profile --preset bogus");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("table-one") != std::string::npos);
}

TEST_CASE("profile writes to a file and measures timing on request") {
  const fs::path dir = fresh_dir("profile_out");
  const fs::path csv = dir / "profile.csv";
  const CliResult r = run_cli(
      "profile --channels 2 --dim 256 --w-len 0.5 --bins 16 --time "
      "--timing-windows 3 --out " +
      csv.string());
  CHECK(r.exit_code == 0);
  const std::string text = slurp(csv);
  CHECK(text.find("memory_factor_of_D,22,22,22,23,65,36,22,66") !=
        std::string::npos);
  CHECK(text.find("feature_time_ms,") != std::string::npos);
  CHECK(text.find("ratio_feature_vs_hdvec,") != std::string::npos);
}

TEST_CASE("evaluate runs end to end on a prepared synthetic dataset") {
  const fs::path data = fresh_dir("eval_data");
  const fs::path out = fresh_dir("eval_out");
  REQUIRE(run_cli("prepare --synth "
                  "n_seizures=3,channels=2,min_seizure_s=6,max_seizure_s=9 "
                  "--seed 11 " +
                  data.string())
              .exit_code == 0);

  const CliResult r = run_cli(
      "evaluate --data " + data.string() + " --out " + out.string() +
      " --approach Ampl --seed 4 --dim 1024 --w-len 1.0");
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "report.json"));
  REQUIRE(fs::exists(out / "summary.csv"));

  const nlohmann::json report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report.at("results").size() == 1);
  CHECK(report.at("results").at(0).at("folds").size() == 3);
  CHECK(report.at("config").at("seed") == 4);
  // Stage order raw -> smoothed -> merged is fixed in the serialized report.
  const std::string text = slurp(out / "report.json");
  const size_t raw_pos = text.find("\"raw\"");
  const size_t smoothed_pos = text.find("\"smoothed\"");
  const size_t merged_pos = text.find("\"merged\"");
  CHECK(raw_pos != std::string::npos);
  CHECK(raw_pos < smoothed_pos);
  CHECK(smoothed_pos < merged_pos);

  SUBCASE("a second run reproduces the numeric payload") {
    const fs::path out2 = fresh_dir("eval_out2");
    const CliResult r2 = run_cli(
        "evaluate --data " + data.string() + " --out " + out2.string() +
        " --approach Ampl --seed 4 --dim 1024 --w-len 1.0");
    CHECK(r2.exit_code == 0);
    const nlohmann::json a = nlohmann::json::parse(slurp(out / "report.json"));
    const nlohmann::json b = nlohmann::json::parse(slurp(out2 / "report.json"));
    CHECK(a.at("results") == b.at("results"));
  }
}

TEST_CASE("evaluate lists all config problems at once") {
  const fs::path data = fresh_dir("eval_bad");
  REQUIRE(run_cli("prepare --synth "
                  "n_seizures=2,channels=2,min_seizure_s=5,max_seizure_s=6 "
                  "--seed 1 " +
                  data.string())
              .exit_code == 0);
  const CliResult r =
      run_cli("evaluate --data " + data.string() +
              " --approach Ampl --dim 32 --levels 1 --w-len 0");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("D must be at least 64") != std::string::npos);
  CHECK(r.output.find("L must be at least 2") != std::string::npos);
  CHECK(r.output.find("w_len must be positive") != std::string::npos);
}

TEST_CASE("evaluate without a prepared dataset exits with code 2") {
  const fs::path data = fresh_dir("eval_nodata");
  const CliResult r = run_cli("evaluate --data " + data.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("manifest") != std::string::npos);
}

TEST_CASE("evaluate on corrupt data exits with code 1 and file context") {
  const fs::path data = fresh_dir("eval_corrupt");
  REQUIRE(run_cli("prepare --synth "
                  "n_seizures=2,channels=2,min_seizure_s=5,max_seizure_s=6 "
                  "--seed 8 " +
                  data.string())
              .exit_code == 0);
  // Truncate one balanced file mid-row.
  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(data / "manifest.json"));
  const std::string victim = manifest.at("files").at(0).at("csv");
  {
    std::ofstream out(data / victim, std::ios::binary);
    out << "time_s,ch01,ch02,label\n0.000000,1.0\n";
  }
  const CliResult r = run_cli("evaluate --data " + data.string() + " --approach Ampl");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find(victim) != std::string::npos);
}

TEST_CASE("config file values are used unless flags override them") {
  const fs::path data = fresh_dir("eval_cfg");
  const fs::path out = fresh_dir("eval_cfg_out");
  REQUIRE(run_cli("prepare --synth "
                  "n_seizures=2,channels=2,min_seizure_s=5,max_seizure_s=6 "
                  "--seed 2 " +
                  data.string())
              .exit_code == 0);
  const fs::path cfg_path = data / "config.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"approach":"Entr","D":2048,"w_len_s":1.0,"seed":21})";
  }
  const CliResult r =
      run_cli("evaluate --data " + data.string() + " --out " + out.string() +
              " --config " + cfg_path.string() + " --dim 1024");
  CHECK(r.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report.at("config").at("D") == 1024);     // flag wins
  CHECK(report.at("config").at("seed") == 21);    // file value
  CHECK(report.at("results").at(0).at("approach") == "Entr");
}

TEST_CASE("evaluate --approach all yields eight result blocks") {
  const fs::path data = fresh_dir("eval_all");
  const fs::path out = fresh_dir("eval_all_out");
  REQUIRE(run_cli("prepare --synth "
                  "n_seizures=2,channels=2,min_seizure_s=6,max_seizure_s=8 "
                  "--seed 13 " +
                  data.string())
              .exit_code == 0);
  const CliResult r = run_cli("evaluate --data " + data.string() + " --out " +
                              out.string() +
                              " --approach all --seed 2 --dim 512 --w-len 1.0");
  CHECK(r.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(slurp(out / "report.json"));
  REQUIRE(report.at("results").size() == 8);
  const char* order[] = {"Ampl", "Entr",    "CWT", "3Feat",
                         "45Feat", "FFT", "RawAmpl", "LBP"};
  for (int i = 0; i < 8; ++i)
    CHECK(report.at("results").at(i).at("approach") == order[i]);
  // The 45-feature definition is pinned into the report when used.
  CHECK(report.at("config").at("registry_45").size() == 45);
}

TEST_CASE("profile --preset eeg-18 recomputes the columns") {
  const CliResult r = run_cli("profile --preset eeg-18");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("memory_factor_of_D,38,38,38,23,65,84,38,82") !=
        std::string::npos);
}

TEST_CASE("evaluate --registry pins a custom 45-feature set") {
  const fs::path data = fresh_dir("eval_reg");
  const fs::path out = fresh_dir("eval_reg_out");
  REQUIRE(run_cli("prepare --synth "
                  "n_seizures=2,channels=2,min_seizure_s=6,max_seizure_s=8 "
                  "--seed 3 " +
                  data.string())
              .exit_code == 0);
  const fs::path reg_path = data / "registry.json";
  {
    std::ofstream regf(reg_path);
    regf << hdseize::FeatureRegistry::default_45().to_json().dump();
  }
  const CliResult r = run_cli("evaluate --data " + data.string() + " --out " +
                              out.string() + " --approach 45Feat --dim 512 " +
                              "--w-len 1.0 --registry " + reg_path.string());
  CHECK(r.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report.at("config").at("registry_45").size() == 45);

  // A wrong-sized registry is a usage error.
  const fs::path bad_path = data / "bad_registry.json";
  {
    std::ofstream bad(bad_path);
    bad << R"([{"name":"x","kind":"total_power"}])";
  }
  const CliResult bad_run =
      run_cli("evaluate --data " + data.string() + " --approach 45Feat " +
              "--registry " + bad_path.string());
  CHECK(bad_run.exit_code == 2);
}

TEST_CASE("recorded-input prepare pipeline works via CSV + sidecar") {
  const fs::path in = fresh_dir("rec_in");
  const fs::path out = fresh_dir("rec_out");

  // Build a small recording with one seizure directly as CSV + sidecar.
  // 480 s at 64 Hz keeps the file small; prepare resamples to 256 Hz.
  {
    std::ofstream csv(in / "subj.csv");
    csv << "time_s,ch01,ch02,label\n";
    const double fs = 64.0;
    hdseize::Rng rng(3);
    for (int t = 0; t < 480 * 64; ++t) {
      const double a = 10.0 * rng.gaussian();
      const double b = 10.0 * rng.gaussian();
      char line[128];
      std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,0\n", t / fs, a, b);
      csv << line;
    }
    std::ofstream sidecar(in / "subj.json");
    sidecar << R"({"subject":"subj","fs":64,"seizures":[{"onset_s":400,"offset_s":420}]})";
  }

  const CliResult r =
      run_cli("prepare --input " + in.string() + " --seed 7 " + out.string());
  CHECK(r.exit_code == 0);
  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(out / "manifest.json"));
  REQUIRE(manifest.at("files").size() == 1);
  CHECK(manifest.at("files").at(0).at("fs") == 256.0);
  CHECK(manifest.at("files").at(0).at("subject") == "subj");
  // 20 s of ictal + 20 s of interictal at 256 Hz.
  CHECK(manifest.at("files").at(0).at("samples") == 2 * 20 * 256);
}
