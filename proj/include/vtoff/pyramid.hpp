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

#include <complex>
#include <vector>

#include "vtoff/fft.hpp"
#include "vtoff/image.hpp"

namespace vtoff {

struct PyramidSpec {
  int levels = 4;
  int orientations = 8;
};

// One oriented band-pass subband. Level 0 is the finest band (input size);
// each further level halves both dimensions.
struct ComplexSubband {
  int level = 0;
  int orientation = 0;
  int width = 0;
  int height = 0;
  std::vector<std::complex<float>> coeffs;

  std::complex<float> at(int x, int y) const { return coeffs[static_cast<std::size_t>(y) * width + x]; }
};

struct Pyramid {
  // Extent of the unpadded input; padding beyond it is reflected.
  int source_width = 0;
  int source_height = 0;
  PyramidSpec spec;
  std::vector<ComplexSubband> bands;  // level-major, then orientation

  const ComplexSubband& band(int level, int orientation) const {
    return bands[static_cast<std::size_t>(level) * spec.orientations + orientation];
  }
};

// Complex steerable pyramid built in the frequency domain: raised-cosine
// radial masks in log2 radius, one-sided cos^(K-1) angular masks.
// Non-power-of-two inputs are reflect-padded first.
Pyramid build_pyramid(const Plane& x, const PyramidSpec& spec = {});

struct CwSsimParams {
  PyramidSpec pyramid;
  int window = 7;
  double k = 0.0;
  // Pyramid levels whose subbands are pooled (0 = finest).
  std::vector<int> pooled_levels = {1, 2, 3};
};

double cw_ssim(const Plane& x, const Plane& y, const CwSsimParams& p = {});
double cw_ssim(const Pyramid& x, const Pyramid& y, const CwSsimParams& p = {});

// Frequency-domain filter values, exposed for filter-bank checks.
// Radial high-pass of the split at log2 radius `edge` (transition [edge-1, edge]).
double radial_highpass(double log2_radius, double edge);
double radial_lowpass(double log2_radius, double edge);
// One-sided angular mask of band `b` out of `k` orientations.
double angular_mask(double angle, int b, int k);
// Real (two-sided) steerable angular response, whose squares sum to 1 over bands.
double steerable_angular_response(double angle, int b, int k);

}  // namespace vtoff
