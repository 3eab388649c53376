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

#include <vector>

#include "hdseize/pipeline.hpp"
#include "oracles.hpp"

using namespace hdseize;

TEST_CASE("training bundles one prototype per class") {
  const Hypervector ictal_w = random_hv(512, 1);
  const Hypervector inter_w = random_hv(512, 2);

  SUBCASE("single window per class reproduces the windows") {
    const std::vector<Hypervector> windows{ictal_w, inter_w};
    const std::vector<uint8_t> labels{1, 0};
    const ClassPrototypes p = train(windows, labels);
    CHECK(p.ictal == ictal_w);
    CHECK(p.interictal == inter_w);
  }
  SUBCASE("identical windows bundle to themselves") {
    const std::vector<Hypervector> windows{ictal_w, ictal_w, ictal_w, inter_w};
    const std::vector<uint8_t> labels{1, 1, 1, 0};
    CHECK(train(windows, labels).ictal == ictal_w);
  }
  SUBCASE("an empty class names itself in the error") {
    const std::vector<Hypervector> windows{ictal_w, inter_w};
    CHECK_THROWS_WITH_AS(train(windows, std::vector<uint8_t>{1, 1}),
                         doctest::Contains("interictal"), data_error);
    CHECK_THROWS_WITH_AS(train(windows, std::vector<uint8_t>{0, 0}),
                         doctest::Contains("ictal"), data_error);
  }
}

TEST_CASE("training is order independent and merges exactly") {
  std::vector<Hypervector> windows;
  std::vector<uint8_t> labels;
  for (uint32_t i = 0; i < 12; ++i) {
    windows.push_back(random_hv(300, derive_seed(8, "train", i)));
    labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  const ClassPrototypes whole = train(windows, labels);

  // Windows in reverse order.
  std::vector<Hypervector> rev(windows.rbegin(), windows.rend());
  std::vector<uint8_t> rev_labels(labels.rbegin(), labels.rend());
  const ClassPrototypes reversed = train(rev, rev_labels);
  CHECK(whole.ictal == reversed.ictal);
  CHECK(whole.interictal == reversed.interictal);

  // Two disjoint batches merged by count addition.
  BundleAccumulator ict_a(300), int_a(300), ict_b(300), int_b(300);
  for (uint32_t i = 0; i < 6; ++i) (labels[i] ? ict_a : int_a).add(windows[i]);
  for (uint32_t i = 6; i < 12; ++i) (labels[i] ? ict_b : int_b).add(windows[i]);
  ict_a.merge(ict_b);
  int_a.merge(int_b);
  const ClassPrototypes merged =
      finalize_prototypes(std::move(ict_a), std::move(int_a));
  CHECK(merged.ictal == whole.ictal);
  CHECK(merged.interictal == whole.interictal);
}

TEST_CASE("classification picks the nearer prototype, ties to ictal") {
  Hypervector ictal(64), interictal(64), probe(64);
  ictal.set_bit(0, true);
  ictal.set_bit(1, true);
  interictal.set_bit(2, true);
  interictal.set_bit(3, true);
  const ClassPrototypes p{BundleAccumulator(64), BundleAccumulator(64), ictal,
                          interictal};

  CHECK(classify(ictal, p) == SeizureLabel::kIctal);
  CHECK(classify(interictal, p) == SeizureLabel::kInterictal);
  // The all-zero probe is exactly 2 bits from both prototypes.
  CHECK(classify(probe, p) == SeizureLabel::kIctal);
}

TEST_CASE("classification is invariant under binding with a fixed vector") {
  const Hypervector key = random_hv(1024, 99);
  std::vector<Hypervector> windows;
  std::vector<uint8_t> labels;
  for (uint32_t i = 0; i < 10; ++i) {
    windows.push_back(random_hv(1024, derive_seed(71, "inv", i)));
    labels.push_back(i < 5 ? 1 : 0);
  }
  const ClassPrototypes p = train(windows, labels);
  const ClassPrototypes bound{BundleAccumulator(1024), BundleAccumulator(1024),
                              bind(p.ictal, key), bind(p.interictal, key)};
  for (uint32_t i = 0; i < 30; ++i) {
    const Hypervector w = random_hv(1024, derive_seed(72, "probe", i));
    CHECK(classify(w, p) == classify(bind(w, key), bound));
  }
}

TEST_CASE("classify agrees with a per-bit nearest-prototype oracle") {
  // Two-cluster data at small D: windows are noisy copies of either center.
  const uint32_t D = 256;
  const Hypervector center_a = random_hv(D, 1001);
  const Hypervector center_b = random_hv(D, 1002);
  Rng rng(7);
  std::vector<Hypervector> windows;
  std::vector<uint8_t> labels;
  for (uint32_t i = 0; i < 40; ++i) {
    Hypervector w = i % 2 == 0 ? center_a : center_b;
    for (uint32_t b = 0; b < D; ++b)
      if (rng.uniform() < 0.1) w.set_bit(b, !w.bit(b));
    windows.push_back(std::move(w));
    labels.push_back(i % 2 == 0 ? 1 : 0);
  }
  const ClassPrototypes p = train(windows, labels);

  for (const Hypervector& w : windows) {
    uint32_t d_ictal = 0, d_inter = 0;
    for (uint32_t b = 0; b < D; ++b) {
      d_ictal += w.bit(b) != p.ictal.bit(b) ? 1 : 0;
      d_inter += w.bit(b) != p.interictal.bit(b) ? 1 : 0;
    }
    const SeizureLabel want =
        d_ictal <= d_inter ? SeizureLabel::kIctal : SeizureLabel::kInterictal;
    CHECK(classify(w, p) == want);
  }
}

TEST_CASE("fold plans hold every file out exactly once") {
  CHECK_THROWS_AS(make_fold_plans(1), config_error);
  const auto plans = make_fold_plans(3);
  REQUIRE(plans.size() == 3);
  std::vector<bool> held(3, false);
  for (const FoldPlan& p : plans) {
    CHECK(p.train_files.size() == 2);
    CHECK_FALSE(held[p.held_out]);
    held[p.held_out] = true;
    for (uint32_t f : p.train_files) CHECK(f != p.held_out);
  }
  for (bool h : held) CHECK(h);
}

TEST_CASE("window slicing geometry and labels") {
  BalancedFile f;
  f.name = "slice";
  f.subject = "s";
  f.fs = 256.0;
  const size_t half = 1024; // 4 s interictal + 4 s ictal
  f.channels.assign(2, std::vector<double>(2 * half, 0.0));
  f.labels.assign(half, 0);
  f.labels.insert(f.labels.end(), half, 1);

  const auto windows = slice_windows(f, 1.0, 0.5);
  // floor((2048 - 256) / 128) + 1 = 15 windows.
  REQUIRE(windows.size() == 15);
  CHECK(windows[0].sample_count() == 256);
  CHECK(windows[0].start_s == 0.0);
  CHECK(windows[1].start_s == doctest::Approx(0.5));
  // Majority labeling: windows fully before the junction are 0, fully after
  // are 1; the straddling window at start 3.5 s is half/half -> 0.
  CHECK(windows[0].label == 0);
  CHECK(windows[7].label == 0); // starts at 3.5 s, exactly half ictal
  CHECK(windows[8].label == 1); // starts at 4.0 s
  CHECK(windows[14].label == 1);

  CHECK_THROWS_AS(slice_windows(f, 100.0, 0.5), data_error);
}

TEST_CASE("run_loocv separates an easy synthetic subject") {
  SynthSpec spec;
  spec.n_seizures = 3;
  spec.channels = 4;
  spec.min_seizure_s = 15.0;
  spec.max_seizure_s = 25.0;
  const auto files = synth_subject(spec, 21);

  EncoderConfig cfg;
  cfg.approach = Approach::kAmpl;
  cfg.dim = 2048;
  cfg.channels = 4;
  cfg.w_len_s = 1.0;
  cfg.w_step_s = 0.5;
  cfg.master_seed = 3;
  const PostprocConfig post;

  const SubjectResult r = run_loocv(files, cfg, post);
  CHECK(r.folds.size() == 3);
  CHECK(r.subject == "synth01");
  for (const FoldResult& f : r.folds) CHECK(f.n_test_windows > 0);
  CHECK(r.mean_merged.episode.f1 > 0.9);
  CHECK(r.mean_merged.duration.f1 > 0.7);
  CHECK(r.ops_per_window.total() == 2ull * cfg.channels);

  SUBCASE("deterministic across runs") {
    const SubjectResult r2 = run_loocv(files, cfg, post);
    REQUIRE(r2.folds.size() == r.folds.size());
    for (size_t i = 0; i < r.folds.size(); ++i) {
      CHECK(r.folds[i].raw.duration.f1 == r2.folds[i].raw.duration.f1);
      CHECK(r.folds[i].merged.episode.f1 == r2.folds[i].merged.episode.f1);
    }
  }
  SUBCASE("parallel encoding changes nothing") {
    const SubjectResult r2 = run_loocv(files, cfg, post, nullptr, 2);
    for (size_t i = 0; i < r.folds.size(); ++i) {
      CHECK(r.folds[i].raw.duration.f1 == r2.folds[i].raw.duration.f1);
      CHECK(r.folds[i].merged.episode.f1 == r2.folds[i].merged.episode.f1);
    }
  }
  SUBCASE("a coarser training stride still separates") {
    EncoderConfig strided = cfg;
    strided.train_step_s = 2.0; // train on every fourth evaluation window
    const SubjectResult r2 = run_loocv(files, strided, post);
    CHECK(r2.folds.size() == 3);
    CHECK(r2.mean_merged.episode.f1 > 0.9);
    // Evaluation-window count is unchanged by the training stride.
    for (size_t i = 0; i < r.folds.size(); ++i)
      CHECK(r2.folds[i].n_test_windows == r.folds[i].n_test_windows);
  }
}

TEST_CASE("run_loocv rejects bad inputs") {
  SynthSpec spec;
  spec.n_seizures = 2;
  spec.channels = 2;
  spec.min_seizure_s = 8.0;
  spec.max_seizure_s = 10.0;
  const auto files = synth_subject(spec, 22);

  EncoderConfig cfg;
  cfg.approach = Approach::kAmpl;
  cfg.dim = 256;
  cfg.channels = 2;
  cfg.w_len_s = 1.0;

  SUBCASE("fewer than two files") {
    const std::vector<BalancedFile> one{files[0]};
    CHECK_THROWS_AS(run_loocv(one, cfg, PostprocConfig{}), config_error);
  }
  SUBCASE("channel mismatch") {
    cfg.channels = 5;
    CHECK_THROWS_AS(run_loocv(files, cfg, PostprocConfig{}), config_error);
  }
}
