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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtoff/dataset.hpp"
#include "vtoff/image.hpp"
#include "vtoff/metrics.hpp"

namespace vtoff {

enum class DistortionKind { kMaskGarment, kHueJitter, kPatchColorJitter, kPlainWhite, kRotate, kPosterize };

std::string_view distortion_name(DistortionKind k);
std::optional<DistortionKind> distortion_from_name(std::string_view name);

enum class StudyTarget { kPerson, kGarment };

struct DistortionSpec {
  DistortionKind kind = DistortionKind::kPlainWhite;
  std::string label;
  double hue_shift = 72.0;  // degrees
  double angle = 2.0;       // degrees, counter-clockwise
  int bits = 2;
  int patch = 64;
  int strength = 40;  // max per-channel offset
  // Mask colour selecting the garment in a parsing map; any nonzero pixel when unset.
  std::optional<std::array<std::uint8_t, 3>> mask_rgb;
  std::uint64_t seed = 0;

  void validate() const;
  // Person image for the masking and jitter cases, garment image otherwise.
  StudyTarget target() const;
};

// Inputs that vary per image rather than per case.
struct DistortionContext {
  const Image* mask = nullptr;
  std::uint64_t item = 0;  // image index, keys the per-image RNG stream
};

Image apply(const Image& img, const DistortionSpec& spec, const DistortionContext& ctx = {});

// The six cases (a)-(f) with default parameters.
std::vector<DistortionSpec> default_study_cases(std::uint64_t seed = 0);

struct StudySpec {
  std::uint64_t seed = 0;
  std::vector<DistortionSpec> cases;
  std::vector<Metric> metrics;
};

StudySpec parse_study_spec(const std::string& json_text);
std::string study_spec_to_json(const StudySpec& s);

struct StudyRow {
  std::string label;
  DistortionKind kind = DistortionKind::kPlainWhite;
  std::vector<double> values;  // unit-scale dataset means, in StudyResult::metrics order
  std::size_t count = 0;
  std::vector<std::string> skipped;
};

struct StudyResult {
  std::vector<Metric> metrics;
  std::vector<StudyRow> rows;  // in case order
  StudySpec spec;
  std::string config_hash;
};

struct StudyOptions {
  int threads = 1;
  PairMetricOptions metric_options;
  // When set, each distorted image is also written here as <case>/<id>.png.
  std::optional<std::filesystem::path> materialize_dir;
};

StudyResult run_study(const DatasetManifest& manifest, const StudySpec& spec, const WeightArchive* weights,
                      const StudyOptions& opts = {});

std::string study_to_json(const StudyResult& r);
std::string study_to_csv(const StudyResult& r);
std::string study_table(const StudyResult& r);

}  // namespace vtoff
