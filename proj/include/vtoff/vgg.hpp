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
#include <vector>

#include "vtoff/archive.hpp"
#include "vtoff/image.hpp"
#include "vtoff/tensor.hpp"

namespace vtoff {

inline constexpr int kVggConvLayers = 13;
inline constexpr int kVggStages = 6;  // stage 0 is the network input
inline constexpr std::array<int, kVggConvLayers> kVggConvIndex = {0, 2, 5, 7, 10, 12, 14, 17, 19, 21, 24, 26, 28};
inline constexpr std::array<int, kVggConvLayers> kVggConvChannels = {64, 64, 128, 128, 256, 256, 256,
                                                                     512, 512, 512, 512, 512, 512};
inline constexpr std::array<int, kVggStages> kVggStageChannels = {3, 64, 128, 256, 512, 512};

struct VggConfig {
  PoolMode pooling = PoolMode::kMax;
  std::array<float, 3> mean = {0.485f, 0.456f, 0.406f};
  std::array<float, 3> std = {0.229f, 0.224f, 0.225f};
};

// Conv weights pulled out of an archive once ("features.N.weight/bias").
class Vgg16Weights {
 public:
  explicit Vgg16Weights(const WeightArchive& archive);

  const Tensor& weight(int layer) const { return weights_[layer]; }
  std::span<const float> bias(int layer) const { return biases_[layer]; }

 private:
  std::array<Tensor, kVggConvLayers> weights_;
  std::array<std::vector<float>, kVggConvLayers> biases_;
};

// Stage 0 is the normalized input; stages 1..5 are relu1_2, relu2_2,
// relu3_3, relu4_3 and relu5_3.
struct VggFeatures {
  std::array<Tensor, kVggStages> stages;
};

// Image bytes scaled to [0,1] as a [1,3,H,W] tensor.
Tensor image_to_tensor(const Image& img);

VggFeatures vgg16_forward(const Tensor& unit_input, const VggConfig& cfg, const Vgg16Weights& weights);
VggFeatures vgg16_features(const Image& img, const VggConfig& cfg, const Vgg16Weights& weights);
VggFeatures vgg16_features(const Image& img, const VggConfig& cfg, const WeightArchive& archive);

// Deterministic He-initialized VGG16 conv stack plus DISTS and LPIPS heads,
// for running the pipeline when pretrained parameters are unavailable.
WeightArchive synthesize_weights(std::uint64_t seed);

}  // namespace vtoff
