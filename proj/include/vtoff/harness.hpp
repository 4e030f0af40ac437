/*
 * Copyright 2026 The vtoff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vtoff/dataset.hpp"
#include "vtoff/distortion.hpp"
#include "vtoff/distribution.hpp"
#include "vtoff/metrics.hpp"
#include "vtoff/report.hpp"

namespace vtoff {

// Default weight archive file name inside the weight directory.
inline constexpr const char* kWeightsFileName = "vtoff_weights.safetensors";
inline constexpr const char* kWeightsDirEnv = "VTOFF_WEIGHTS_DIR";

struct RunConfig {
  std::vector<Metric> metrics;  // empty: command default
  std::optional<std::filesystem::path> weights;
  PairMetricOptions metric_options;
  int threads = 1;
  std::optional<std::filesystem::path> pairs_file;
  // Distribution metrics from VGG relu5_3 means of image directories.
  bool native_features = false;
  bool near_duplicates = false;
  std::optional<std::filesystem::path> materialize_dir;
  std::optional<std::filesystem::path> out_json;
  std::optional<std::filesystem::path> out_csv;

  // Overlays the keys present in a JSON config document.
  void merge_json(const std::string& json_text);
  // Canonical JSON of everything that affects results (not threads or outputs).
  std::string canonical_json() const;
};

// Explicit weights, else $VTOFF_WEIGHTS_DIR/vtoff_weights.safetensors if it exists.
std::optional<std::filesystem::path> resolve_weights(const RunConfig& cfg);

std::vector<std::pair<std::string, std::string>> read_pairs_file(const std::filesystem::path& path);

// Per-pair metrics of predictions against ground truth, paired by stem.
MetricReport cmd_score(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir, const RunConfig& cfg);

// FID (or FD-CLIP for "clip" features) and KID between two feature archives,
// or between two image directories when cfg.native_features is set.
MetricReport cmd_dist(const std::filesystem::path& pred, const std::filesystem::path& gt, const RunConfig& cfg);

StudyResult cmd_distort(const std::filesystem::path& manifest, const std::optional<std::filesystem::path>& study_spec,
                        const RunConfig& cfg);

DatasetManifest cmd_manifest(const std::filesystem::path& person_dir, const std::filesystem::path& garment_dir,
                             const std::string& split, const std::optional<std::filesystem::path>& mask_dir,
                             const RunConfig& cfg);
DuplicateReport cmd_dedup(const std::filesystem::path& manifest, const RunConfig& cfg);

struct LeakResult {
  DuplicateReport report;
  CleanCounts cleaned;
};
LeakResult cmd_leak(const std::filesystem::path& train_manifest, const std::filesystem::path& test_manifest);
std::string leak_to_json(const LeakResult& r);

struct BenchEntry {
  Metric metric;
  int threads = 1;
  double pairs_per_second = 0.0;
  bool identical = true;  // values match the single-thread run bit for bit
};

struct BenchResult {
  std::string cpu;
  std::size_t pairs = 0;
  std::vector<BenchEntry> entries;
};

BenchResult cmd_bench(const std::filesystem::path& fixture_dir, const RunConfig& cfg);
std::string bench_to_json(const BenchResult& r);

// Native 512-d features: spatial mean of relu5_3 per image, sorted by stem.
FeatureSet native_features(const std::filesystem::path& image_dir, const WeightArchive& weights, int threads);

std::string cpu_description();

}  // namespace vtoff
