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
#include "vtoff/perceptual.hpp"

#include <cmath>
#include <string>

#include "vtoff/error.hpp"

namespace vtoff {

namespace {

constexpr double kDistsC1 = 1e-6;
constexpr double kDistsC2 = 1e-6;
constexpr double kLpipsEps = 1e-10;

std::vector<double> nonnegative(const std::vector<float>& v, const std::string& name) {
  std::vector<double> out(v.begin(), v.end());
  for (double x : out)
    if (!(x >= 0.0)) fail(Errc::kInvalidParams, name + " contains a negative or non-finite weight");
  return out;
}

void require_same_size(const Image& x, const Image& y) {
  if (x.width() != y.width() || x.height() != y.height())
    fail(Errc::kDimensionMismatch, "images differ in size: " + std::to_string(x.width()) + "x" + std::to_string(x.height()) +
                                       " vs " + std::to_string(y.width()) + "x" + std::to_string(y.height()));
}

}  // namespace

DistsWeights DistsWeights::from_archive(const WeightArchive& archive) {
  int total = 0;
  for (int c : kVggStageChannels) total += c;
  const auto alpha = nonnegative(archive.get("dists.alpha").values, "dists.alpha");
  const auto beta = nonnegative(archive.get("dists.beta").values, "dists.beta");
  if (static_cast<int>(alpha.size()) != total || static_cast<int>(beta.size()) != total)
    fail(Errc::kShapeMismatch, "dists.alpha/beta must hold " + std::to_string(total) + " weights");
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) sum += alpha[i] + beta[i];
  if (!(sum > 0.0)) fail(Errc::kInvalidParams, "DISTS weights sum to zero");

  DistsWeights w;
  std::size_t offset = 0;
  for (int s = 0; s < kVggStages; ++s) {
    const std::size_t n = kVggStageChannels[s];
    w.alpha[s].assign(alpha.begin() + offset, alpha.begin() + offset + n);
    w.beta[s].assign(beta.begin() + offset, beta.begin() + offset + n);
    for (double& v : w.alpha[s]) v /= sum;
    for (double& v : w.beta[s]) v /= sum;
    offset += n;
  }
  return w;
}

LpipsWeights LpipsWeights::from_archive(const WeightArchive& archive) {
  LpipsWeights w;
  for (int s = 0; s < kVggStages - 1; ++s) {
    const std::string name = "lpips.lin" + std::to_string(s) + ".weight";
    w.lin[s] = nonnegative(archive.get(name).values, name);
    if (static_cast<int>(w.lin[s].size()) != kVggStageChannels[s + 1])
      fail(Errc::kShapeMismatch, name + " must hold " + std::to_string(kVggStageChannels[s + 1]) + " weights");
  }
  return w;
}

PerceptualModel::PerceptualModel(const WeightArchive& archive, PerceptualOptions opts)
    : backbone_(archive),
      dists_w_(DistsWeights::from_archive(archive)),
      lpips_w_(LpipsWeights::from_archive(archive)),
      opts_(opts) {}

VggFeatures PerceptualModel::dists_features(const Image& img) const {
  const Image* src = &img;
  Image resized;
  const int short_side = std::min(img.width(), img.height());
  if (opts_.dists_resize && short_side > opts_.dists_short_side) {
    const double scale = static_cast<double>(opts_.dists_short_side) / short_side;
    const int w = img.width() <= img.height() ? opts_.dists_short_side : static_cast<int>(std::lround(img.width() * scale));
    const int h = img.height() < img.width() ? opts_.dists_short_side : static_cast<int>(std::lround(img.height() * scale));
    resized = resize(img, w, h, GeometrySpec{.interpolation = Interpolation::kBicubic});
    src = &resized;
  }
  const Tensor unit = image_to_tensor(*src);
  VggFeatures f = vgg16_forward(unit, VggConfig{.pooling = PoolMode::kL2}, backbone_);
  // The structure/texture comparison at stage 0 runs on raw [0,1] pixels.
  f.stages[0] = unit;
  return f;
}

VggFeatures PerceptualModel::lpips_features(const Image& img) const {
  return vgg16_features(img, VggConfig{.pooling = PoolMode::kMax}, backbone_);
}

double PerceptualModel::dists_from_features(const VggFeatures& fx, const VggFeatures& fy) const {
  double similarity = 0.0;
  for (int s = 0; s < kVggStages; ++s) {
    const Tensor& x = fx.stages[s];
    const Tensor& y = fy.stages[s];
    if (x.shape() != y.shape()) fail(Errc::kDimensionMismatch, "DISTS feature maps differ in shape at stage " + std::to_string(s));
    const std::size_t count = static_cast<std::size_t>(x.h()) * x.w();
    for (int c = 0; c < x.c(); ++c) {
      const float* px = x.plane(0, c);
      const float* py = y.plane(0, c);
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        mx += px[i];
        my += py[i];
      }
      mx /= count;
      my /= count;
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const double dx = px[i] - mx, dy = py[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cxy += dx * dy;
      }
      vx /= count;
      vy /= count;
      cxy /= count;
      const double texture = (2.0 * mx * my + kDistsC1) / (mx * mx + my * my + kDistsC1);
      const double structure = (2.0 * cxy + kDistsC2) / (vx + vy + kDistsC2);
      similarity += dists_w_.alpha[s][c] * texture + dists_w_.beta[s][c] * structure;
    }
  }
  return 1.0 - similarity;
}

double PerceptualModel::lpips_from_features(const VggFeatures& fx, const VggFeatures& fy) const {
  double total = 0.0;
  for (int s = 1; s < kVggStages; ++s) {
    const Tensor& x = fx.stages[s];
    const Tensor& y = fy.stages[s];
    if (x.shape() != y.shape()) fail(Errc::kDimensionMismatch, "LPIPS feature maps differ in shape at stage " + std::to_string(s));
    const std::size_t count = static_cast<std::size_t>(x.h()) * x.w();
    const auto& lin = lpips_w_.lin[s - 1];
    std::vector<double> norm_x(count, 0.0), norm_y(count, 0.0);
    for (int c = 0; c < x.c(); ++c) {
      const float* px = x.plane(0, c);
      const float* py = y.plane(0, c);
      for (std::size_t i = 0; i < count; ++i) {
        norm_x[i] += static_cast<double>(px[i]) * px[i];
        norm_y[i] += static_cast<double>(py[i]) * py[i];
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      norm_x[i] = std::sqrt(norm_x[i]) + kLpipsEps;
      norm_y[i] = std::sqrt(norm_y[i]) + kLpipsEps;
    }
    std::vector<double> acc(count, 0.0);
    for (int c = 0; c < x.c(); ++c) {
      const float* px = x.plane(0, c);
      const float* py = y.plane(0, c);
      for (std::size_t i = 0; i < count; ++i) {
        const double d = px[i] / norm_x[i] - py[i] / norm_y[i];
        acc[i] += lin[c] * d * d;
      }
    }
    double mean = 0.0;
    for (double v : acc) mean += v;
    total += mean / count;
  }
  return total;
}

double PerceptualModel::dists(const Image& x, const Image& y) const {
  require_same_size(x, y);
  return dists_from_features(dists_features(x), dists_features(y));
}

double PerceptualModel::lpips(const Image& x, const Image& y) const {
  require_same_size(x, y);
  return lpips_from_features(lpips_features(x), lpips_features(y));
}

double dists(const Image& x, const Image& y, const WeightArchive& archive) { return PerceptualModel(archive).dists(x, y); }

double lpips(const Image& x, const Image& y, const WeightArchive& archive) { return PerceptualModel(archive).lpips(x, y); }

}  // namespace vtoff
