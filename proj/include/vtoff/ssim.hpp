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

#include <vector>

#include "vtoff/image.hpp"

namespace vtoff {

struct SsimParams {
  int window_size = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  // Average over f x f blocks first, f = max(1, round(min(H, W) / 256)).
  bool auto_downsample = true;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

struct MsSsimParams {
  std::vector<double> scale_weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  SsimParams ssim = {.auto_downsample = false};
};

// Normalized separable Gaussian window, stored as its 1-D profile.
struct GaussianWindow {
  int size = 0;
  std::vector<double> profile;

  double at(int row, int col) const { return profile[row] * profile[col]; }
};

GaussianWindow gaussian_window(int size, double sigma);

struct SsimResult {
  double mean = 0.0;
  double cs_mean = 0.0;  // mean contrast-structure term
  Plane map;             // local SSIM over the valid region
};

// Luma-plane SSIM with Gaussian-weighted moments over the valid region.
SsimResult ssim(const Plane& x, const Plane& y, const SsimParams& p = {});

double ms_ssim(const Plane& x, const Plane& y, const MsSsimParams& p = {});

// Block-mean downsampling by an integer factor; trailing rows/cols dropped.
Plane block_mean(const Plane& in, int factor);

int ssim_downsample_factor(int width, int height);

}  // namespace vtoff
