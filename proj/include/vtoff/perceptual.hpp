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
#include <vector>

#include "vtoff/archive.hpp"
#include "vtoff/image.hpp"
#include "vtoff/vgg.hpp"

namespace vtoff {

// Per-stage, per-channel texture (alpha) and structure (beta) weights,
// jointly normalized to sum to 1 at load.
struct DistsWeights {
  std::array<std::vector<double>, kVggStages> alpha;
  std::array<std::vector<double>, kVggStages> beta;

  static DistsWeights from_archive(const WeightArchive& archive);
};

// Per-stage 1x1 channel weights over the five relu taps.
struct LpipsWeights {
  std::array<std::vector<double>, kVggStages - 1> lin;

  static LpipsWeights from_archive(const WeightArchive& archive);
};

struct PerceptualOptions {
  // Downscale so the shorter side is this many pixels when it is larger.
  bool dists_resize = true;
  int dists_short_side = 256;
};

// DISTS (L2-pooled VGG) and LPIPS (max-pooled VGG) over one set of weights.
class PerceptualModel {
 public:
  explicit PerceptualModel(const WeightArchive& archive, PerceptualOptions opts = {});

  double dists(const Image& x, const Image& y) const;
  double lpips(const Image& x, const Image& y) const;

  // Feature extraction and scoring split apart, so a reference image can be
  // featurized once and compared against many candidates.
  VggFeatures dists_features(const Image& img) const;
  VggFeatures lpips_features(const Image& img) const;
  double dists_from_features(const VggFeatures& x, const VggFeatures& y) const;
  double lpips_from_features(const VggFeatures& x, const VggFeatures& y) const;

  const Vgg16Weights& backbone() const noexcept { return backbone_; }
  const PerceptualOptions& options() const noexcept { return opts_; }

 private:
  Vgg16Weights backbone_;
  DistsWeights dists_w_;
  LpipsWeights lpips_w_;
  PerceptualOptions opts_;
};

double dists(const Image& x, const Image& y, const WeightArchive& archive);
double lpips(const Image& x, const Image& y, const WeightArchive& archive);

}  // namespace vtoff
