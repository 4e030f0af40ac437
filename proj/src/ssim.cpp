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
#include "vtoff/ssim.hpp"

#include <algorithm>
#include <cmath>

#include "vtoff/error.hpp"
#include "vtoff/numeric.hpp"

namespace vtoff {

namespace {

struct Grid {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  Grid(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0.0) {}
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Grid to_grid(const Plane& p) {
  Grid g(p.width, p.height);
  std::copy(p.data.begin(), p.data.end(), g.v.begin());
  return g;
}

Grid block_mean_grid(const Grid& in, int f) {
  if (f == 1) return in;
  Grid out(in.w / f, in.h / f);
  const double inv = 1.0 / (f * f);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < f; ++dy)
        for (int dx = 0; dx < f; ++dx) s += in.at(x * f + dx, y * f + dy);
      out.at(x, y) = s * inv;
    }
  return out;
}

// Valid-region separable filtering: horizontal then vertical.
Grid filter_valid(const Grid& in, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  Grid tmp(in.w - n + 1, in.h);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < tmp.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[i] * in.at(x + i, y);
      tmp.at(x, y) = s;
    }
  Grid out(tmp.w, in.h - n + 1);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[i] * tmp.at(x, y + i);
      out.at(x, y) = s;
    }
  return out;
}

struct ScaleTerms {
  double ssim_mean;
  double cs_mean;
  Grid map;
};

ScaleTerms ssim_terms(const Grid& x, const Grid& y, const SsimParams& p, const GaussianWindow& win) {
  if (x.w < p.window_size || x.h < p.window_size)
    fail(Errc::kTooSmall, "plane smaller than the SSIM window");
  Grid xx(x.w, x.h), yy(x.w, x.h), xy(x.w, x.h);
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    xx.v[i] = x.v[i] * x.v[i];
    yy.v[i] = y.v[i] * y.v[i];
    xy.v[i] = x.v[i] * y.v[i];
  }
  const Grid mu_x = filter_valid(x, win.profile);
  const Grid mu_y = filter_valid(y, win.profile);
  const Grid e_xx = filter_valid(xx, win.profile);
  const Grid e_yy = filter_valid(yy, win.profile);
  const Grid e_xy = filter_valid(xy, win.profile);

  const double c1 = p.c1(), c2 = p.c2();
  Grid map(mu_x.w, mu_x.h);
  CompensatedSum ssim_sum, cs_sum;
  for (std::size_t i = 0; i < map.v.size(); ++i) {
    const double mx = mu_x.v[i], my = mu_y.v[i];
    const double sxx = e_xx.v[i] - mx * mx;
    const double syy = e_yy.v[i] - my * my;
    const double sxy = e_xy.v[i] - mx * my;
    const double cs = (2.0 * sxy + c2) / (sxx + syy + c2);
    const double lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
    map.v[i] = lum * cs;
    ssim_sum.add(map.v[i]);
    cs_sum.add(cs);
  }
  const double n = static_cast<double>(map.v.size());
  return {ssim_sum.value() / n, cs_sum.value() / n, std::move(map)};
}

void check_params(const SsimParams& p) {
  if (p.window_size < 1 || p.window_size % 2 == 0) fail(Errc::kInvalidParams, "SSIM window size must be odd");
  if (!(p.k1 > 0.0) || !(p.k2 > 0.0) || !(p.dynamic_range > 0.0))
    fail(Errc::kInvalidParams, "SSIM constants must be positive");
}

void check_pair(const Plane& x, const Plane& y) {
  if (x.width != y.width || x.height != y.height)
    fail(Errc::kDimensionMismatch, "SSIM inputs differ in size");
}

}  // namespace

GaussianWindow gaussian_window(int size, double sigma) {
  if (size < 1 || size % 2 == 0 || !(sigma > 0.0)) fail(Errc::kInvalidParams, "window needs odd size and sigma > 0");
  GaussianWindow w;
  w.size = size;
  w.profile.resize(size);
  const int half = size / 2;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double r = i - half;
    w.profile[i] = std::exp(-(r * r) / (2.0 * sigma * sigma));
    total += w.profile[i];
  }
  for (double& v : w.profile) v /= total;
  return w;
}

int ssim_downsample_factor(int width, int height) {
  return std::max(1, static_cast<int>(std::lround(std::min(width, height) / 256.0)));
}

Plane block_mean(const Plane& in, int factor) {
  if (factor < 1) fail(Errc::kInvalidParams, "downsample factor must be >= 1");
  const Grid g = block_mean_grid(to_grid(in), factor);
  Plane out(g.w, g.h, in.range);
  for (std::size_t i = 0; i < g.v.size(); ++i) out.data[i] = static_cast<float>(g.v[i]);
  return out;
}

SsimResult ssim(const Plane& x, const Plane& y, const SsimParams& p) {
  check_params(p);
  check_pair(x, y);
  const int f = p.auto_downsample ? ssim_downsample_factor(x.width, x.height) : 1;
  const Grid gx = block_mean_grid(to_grid(x), f);
  const Grid gy = block_mean_grid(to_grid(y), f);
  const ScaleTerms t = ssim_terms(gx, gy, p, gaussian_window(p.window_size, p.sigma));

  SsimResult r;
  r.mean = t.ssim_mean;
  r.cs_mean = t.cs_mean;
  r.map = Plane(t.map.w, t.map.h, SampleRange::kUnit);
  for (std::size_t i = 0; i < t.map.v.size(); ++i) r.map.data[i] = static_cast<float>(t.map.v[i]);
  return r;
}

double ms_ssim(const Plane& x, const Plane& y, const MsSsimParams& p) {
  check_params(p.ssim);
  check_pair(x, y);
  const auto& weights = p.scale_weights;
  if (weights.empty()) fail(Errc::kInvalidParams, "MS-SSIM needs at least one scale");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) fail(Errc::kInvalidParams, "MS-SSIM weights must be non-negative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-4) fail(Errc::kInvalidParams, "MS-SSIM weights must sum to 1");

  const int f = p.ssim.auto_downsample ? ssim_downsample_factor(x.width, x.height) : 1;
  Grid gx = block_mean_grid(to_grid(x), f);
  Grid gy = block_mean_grid(to_grid(y), f);
  const int scales = static_cast<int>(weights.size());
  const long need = static_cast<long>(p.ssim.window_size) << (scales - 1);
  if (std::min(gx.w, gx.h) < need) fail(Errc::kTooSmall, "image too small for the configured MS-SSIM scales");

  const GaussianWindow win = gaussian_window(p.ssim.window_size, p.ssim.sigma);
  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    const ScaleTerms t = ssim_terms(gx, gy, p.ssim, win);
    if (s + 1 < scales) {
      result *= std::pow(std::max(t.cs_mean, 0.0), weights[s]);
      gx = block_mean_grid(gx, 2);
      gy = block_mean_grid(gy, 2);
    } else {
      result *= std::pow(std::max(t.ssim_mean, 0.0), weights[s]);
    }
  }
  return result;
}

}  // namespace vtoff
