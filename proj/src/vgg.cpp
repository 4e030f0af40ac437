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
#include "vtoff/vgg.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vtoff/error.hpp"
#include "vtoff/rng.hpp"

namespace vtoff {

namespace {

std::string weight_name(int layer) { return "features." + std::to_string(kVggConvIndex[layer]) + ".weight"; }
std::string bias_name(int layer) { return "features." + std::to_string(kVggConvIndex[layer]) + ".bias"; }

// Stage boundaries: the tapped relu follows these conv layers.
constexpr std::array<int, 5> kStageLastLayer = {1, 3, 6, 9, 12};

}  // namespace

Vgg16Weights::Vgg16Weights(const WeightArchive& archive) {
  int in_channels = 3;
  for (int l = 0; l < kVggConvLayers; ++l) {
    const auto wn = weight_name(l);
    const auto bn = bias_name(l);
    if (!archive.contains(wn) || !archive.contains(bn)) fail(Errc::kMissingTensor, "weight archive lacks " + wn + " or " + bn);
    Tensor w = archive.tensor4(wn);
    if (w.n() != kVggConvChannels[l] || w.c() != in_channels || w.h() != 3 || w.w() != 3)
      fail(Errc::kShapeMismatch, wn + " has shape " + w.shape_string() + ", not a VGG16 3x3 kernel");
    const auto& b = archive.get(bn);
    if (static_cast<int>(b.values.size()) != kVggConvChannels[l]) fail(Errc::kShapeMismatch, bn + " has the wrong length");
    weights_[l] = std::move(w);
    biases_[l] = b.values;
    in_channels = kVggConvChannels[l];
  }
}

Tensor image_to_tensor(const Image& img) {
  Tensor t(1, 3, img.height(), img.width());
  const auto px = img.data();
  const std::size_t plane = static_cast<std::size_t>(img.width()) * img.height();
  for (int c = 0; c < 3; ++c) {
    float* dst = t.plane(0, c);
    for (std::size_t i = 0; i < plane; ++i) dst[i] = static_cast<float>(px[3 * i + c] / 255.0);
  }
  return t;
}

VggFeatures vgg16_forward(const Tensor& unit_input, const VggConfig& cfg, const Vgg16Weights& weights) {
  if (unit_input.c() != 3) fail(Errc::kShapeMismatch, "VGG16 expects a 3-channel input");
  VggFeatures f;
  Tensor h = unit_input;
  for (int n = 0; n < h.n(); ++n)
    for (int c = 0; c < 3; ++c) {
      float* p = h.plane(n, c);
      const std::size_t count = static_cast<std::size_t>(h.h()) * h.w();
      for (std::size_t i = 0; i < count; ++i) p[i] = (p[i] - cfg.mean[c]) / cfg.std[c];
    }
  f.stages[0] = h;

  int stage = 0;
  for (int l = 0; l < kVggConvLayers; ++l) {
    if (l == 2 || l == 4 || l == 7 || l == 10) h = pool(h, cfg.pooling);
    h = conv2d(h, weights.weight(l), weights.bias(l));
    relu_inplace(h);
    if (l == kStageLastLayer[stage]) f.stages[++stage] = h;
  }
  return f;
}

VggFeatures vgg16_features(const Image& img, const VggConfig& cfg, const Vgg16Weights& weights) {
  return vgg16_forward(image_to_tensor(img), cfg, weights);
}

VggFeatures vgg16_features(const Image& img, const VggConfig& cfg, const WeightArchive& archive) {
  return vgg16_features(img, cfg, Vgg16Weights(archive));
}

WeightArchive synthesize_weights(std::uint64_t seed) {
  WeightArchive ar;
  SplitMix64 rng(seed);
  int in_channels = 3;
  for (int l = 0; l < kVggConvLayers; ++l) {
    const int out_channels = kVggConvChannels[l];
    const double stddev = std::sqrt(2.0 / (9.0 * in_channels));
    std::vector<float> w(static_cast<std::size_t>(out_channels) * in_channels * 9);
    for (float& v : w) v = static_cast<float>(stddev * rng.normal());
    std::vector<float> b(out_channels);
    for (float& v : b) v = static_cast<float>(0.02 * rng.uniform() - 0.01);
    ar.add(weight_name(l), {out_channels, in_channels, 3, 3}, std::move(w));
    ar.add(bias_name(l), {out_channels}, std::move(b));
    in_channels = out_channels;
  }
  int total = 0;
  for (int c : kVggStageChannels) total += c;
  std::vector<float> alpha(total), beta(total);
  for (float& v : alpha) v = static_cast<float>(0.01 + rng.uniform());
  for (float& v : beta) v = static_cast<float>(0.01 + rng.uniform());
  ar.add("dists.alpha", {1, total, 1, 1}, std::move(alpha));
  ar.add("dists.beta", {1, total, 1, 1}, std::move(beta));
  for (int s = 1; s < kVggStages; ++s) {
    std::vector<float> lin(kVggStageChannels[s]);
    for (float& v : lin) v = static_cast<float>(rng.uniform());
    ar.add("lpips.lin" + std::to_string(s - 1) + ".weight", {1, kVggStageChannels[s], 1, 1}, std::move(lin));
  }
  ar.set_metadata("generator", "vtoff-synthetic");
  ar.set_metadata("seed", std::to_string(seed));
  return ar;
}

}  // namespace vtoff
