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
#include "vtoff/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vtoff/error.hpp"
#include "vtoff/numeric.hpp"

namespace vtoff {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double angular_constant(int k) {
  const int order = k - 1;
  return std::pow(2.0, 2 * order) * factorial(order) * factorial(order) / (k * factorial(2 * order));
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Centred frequency-plane geometry for one pyramid level.
struct Polar {
  int width = 0;
  int height = 0;
  std::vector<double> log_rad;
  std::vector<double> angle;
};

Polar polar_grid(int w, int h) {
  Polar p{w, h, std::vector<double>(static_cast<std::size_t>(w) * h), std::vector<double>(static_cast<std::size_t>(w) * h)};
  const int cx = w / 2, cy = h / 2;
  for (int y = 0; y < h; ++y) {
    const double yr = static_cast<double>(y - cy) / (h / 2.0);
    for (int x = 0; x < w; ++x) {
      const double xr = static_cast<double>(x - cx) / (w / 2.0);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      p.angle[i] = std::atan2(yr, xr);
      p.log_rad[i] = std::log2(std::sqrt(xr * xr + yr * yr));
    }
  }
  // The DC sample borrows its left neighbour's radius.
  p.log_rad[static_cast<std::size_t>(cy) * w + cx] = p.log_rad[static_cast<std::size_t>(cy) * w + cx - 1];
  return p;
}

template <typename T>
std::vector<T> crop_center(const std::vector<T>& v, int w, int h, int nw, int nh) {
  const int x0 = w / 2 - nw / 2;
  const int y0 = h / 2 - nh / 2;
  std::vector<T> out(static_cast<std::size_t>(nw) * nh);
  for (int y = 0; y < nh; ++y)
    for (int x = 0; x < nw; ++x)
      out[static_cast<std::size_t>(y) * nw + x] = v[static_cast<std::size_t>(y + y0) * w + x + x0];
  return out;
}

struct BandGrid {
  int level;
  int orientation;
  ComplexGrid grid;
};

std::vector<BandGrid> decompose(const Plane& x, const PyramidSpec& spec) {
  if (spec.levels < 1 || spec.orientations < 2) fail(Errc::kInvalidParams, "pyramid needs >= 1 level and >= 2 orientations");
  const int min_side = 1 << (spec.levels + 2);
  if (x.width < min_side || x.height < min_side)
    fail(Errc::kTooSmall, "pyramid input must be at least " + std::to_string(min_side) + " px per side");

  const int pw = next_power_of_two(x.width);
  const int ph = next_power_of_two(x.height);
  ComplexGrid padded(pw, ph);
  for (int y = 0; y < ph; ++y) {
    const int sy = reflect_index(y, x.height);
    for (int xx = 0; xx < pw; ++xx) padded.at(xx, y) = Complex(x.at(reflect_index(xx, x.width), sy), 0.0);
  }

  ComplexGrid spectrum = fftshift(fft2(padded, FftDirection::kForward));
  Polar polar = polar_grid(pw, ph);

  for (std::size_t i = 0; i < spectrum.data.size(); ++i) spectrum.data[i] *= radial_lowpass(polar.log_rad[i], 0.0);

  const int order = spec.orientations - 1;
  const Complex phase = std::pow(Complex(0.0, -1.0), order);
  std::vector<BandGrid> out;
  for (int level = 0; level < spec.levels; ++level) {
    const double edge = -1.0 - level;
    for (int b = 0; b < spec.orientations; ++b) {
      ComplexGrid banddft(spectrum.width, spectrum.height);
      for (std::size_t i = 0; i < banddft.data.size(); ++i) {
        const double mask = radial_highpass(polar.log_rad[i], edge) * angular_mask(polar.angle[i], b, spec.orientations);
        banddft.data[i] = mask == 0.0 ? Complex(0.0, 0.0) : phase * spectrum.data[i] * mask;
      }
      out.push_back({level, b, fft2(ifftshift(banddft), FftDirection::kInverse)});
    }
    if (level + 1 == spec.levels) break;
    const int nw = spectrum.width / 2, nh = spectrum.height / 2;
    ComplexGrid lo(nw, nh);
    lo.data = crop_center(spectrum.data, spectrum.width, spectrum.height, nw, nh);
    polar.log_rad = crop_center(polar.log_rad, polar.width, polar.height, nw, nh);
    polar.angle = crop_center(polar.angle, polar.width, polar.height, nw, nh);
    polar.width = nw;
    polar.height = nh;
    for (std::size_t i = 0; i < lo.data.size(); ++i) lo.data[i] *= radial_lowpass(polar.log_rad[i], edge);
    spectrum = std::move(lo);
  }
  return out;
}

// Mean of per-window CW-SSIM scores over windows inside the source extent.
double band_score(const std::vector<Complex>& cx, const std::vector<Complex>& cy, int w, int extent_w,
                  int extent_h, int win, double k) {
  const int nx = extent_w - win + 1;
  const int ny = extent_h - win + 1;
  if (nx < 1 || ny < 1) fail(Errc::kTooSmall, "subband smaller than the CW-SSIM window");

  // Summed-area tables over the extent keep every window O(1).
  const int sw = extent_w + 1;
  std::vector<Complex> corr_sat(static_cast<std::size_t>(sw) * (extent_h + 1));
  std::vector<double> var_sat(corr_sat.size());
  for (int y = 0; y < extent_h; ++y) {
    Complex row_c(0.0, 0.0);
    double row_v = 0.0;
    for (int x = 0; x < extent_w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      row_c += cx[i] * std::conj(cy[i]);
      row_v += std::norm(cx[i]) + std::norm(cy[i]);
      const std::size_t s = static_cast<std::size_t>(y + 1) * sw + x + 1;
      corr_sat[s] = corr_sat[s - sw] + row_c;
      var_sat[s] = var_sat[s - sw] + row_v;
    }
  }
  const double area = static_cast<double>(win) * win;
  CompensatedSum total;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const std::size_t a = static_cast<std::size_t>(y) * sw + x;
      const std::size_t b = a + win;
      const std::size_t c = a + static_cast<std::size_t>(win) * sw;
      const std::size_t d = c + win;
      const Complex corr = (corr_sat[d] - corr_sat[b] - corr_sat[c] + corr_sat[a]) / area;
      const double var = (var_sat[d] - var_sat[b] - var_sat[c] + var_sat[a]) / area;
      const double num = 2.0 * std::abs(corr) + k;
      const double den = var + k;
      total.add(den > 0.0 ? num / den : 1.0);
    }
  return total.value() / (static_cast<double>(nx) * ny);
}

std::vector<Complex> widen(const ComplexSubband& b) {
  std::vector<Complex> out(b.coeffs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Complex(b.coeffs[i].real(), b.coeffs[i].imag());
  return out;
}

void check_cw_params(const CwSsimParams& p) {
  if (p.window < 1) fail(Errc::kInvalidParams, "CW-SSIM window must be positive");
  if (p.pooled_levels.empty()) fail(Errc::kInvalidParams, "CW-SSIM needs at least one pooled level");
  for (int l : p.pooled_levels)
    if (l < 0 || l >= p.pyramid.levels) fail(Errc::kInvalidParams, "pooled level outside the pyramid");
}

}  // namespace

double radial_highpass(double log2_radius, double edge) {
  if (log2_radius >= edge) return 1.0;
  if (log2_radius <= edge - 1.0) return 0.0;
  return std::abs(std::cos(kPi / 2.0 * (log2_radius - edge)));
}

double radial_lowpass(double log2_radius, double edge) {
  if (log2_radius >= edge) return 0.0;
  if (log2_radius <= edge - 1.0) return 1.0;
  return std::abs(std::sin(kPi / 2.0 * (log2_radius - edge)));
}

double angular_mask(double angle, int b, int k) {
  const double d = wrap_angle(angle - kPi * b / k);
  if (std::abs(d) >= kPi / 2.0) return 0.0;
  return 2.0 * std::sqrt(angular_constant(k)) * std::pow(std::cos(d), k - 1);
}

double steerable_angular_response(double angle, int b, int k) {
  return std::sqrt(angular_constant(k)) * std::pow(std::cos(angle - kPi * b / k), k - 1);
}

Pyramid build_pyramid(const Plane& x, const PyramidSpec& spec) {
  Pyramid p;
  p.source_width = x.width;
  p.source_height = x.height;
  p.spec = spec;
  for (auto& bg : decompose(x, spec)) {
    ComplexSubband sb;
    sb.level = bg.level;
    sb.orientation = bg.orientation;
    sb.width = bg.grid.width;
    sb.height = bg.grid.height;
    sb.coeffs.resize(bg.grid.data.size());
    for (std::size_t i = 0; i < sb.coeffs.size(); ++i)
      sb.coeffs[i] = std::complex<float>(static_cast<float>(bg.grid.data[i].real()), static_cast<float>(bg.grid.data[i].imag()));
    p.bands.push_back(std::move(sb));
  }
  return p;
}

double cw_ssim(const Pyramid& x, const Pyramid& y, const CwSsimParams& p) {
  check_cw_params(p);
  if (x.source_width != y.source_width || x.source_height != y.source_height || x.bands.size() != y.bands.size())
    fail(Errc::kDimensionMismatch, "CW-SSIM pyramids differ in shape");
  CompensatedSum total;
  int count = 0;
  for (int level : p.pooled_levels) {
    const int ew = x.source_width >> level;
    const int eh = x.source_height >> level;
    for (int b = 0; b < p.pyramid.orientations; ++b) {
      const ComplexSubband& bx = x.band(level, b);
      const ComplexSubband& by = y.band(level, b);
      total.add(band_score(widen(bx), widen(by), bx.width, ew, eh, p.window, p.k));
      ++count;
    }
  }
  return total.value() / count;
}

double cw_ssim(const Plane& x, const Plane& y, const CwSsimParams& p) {
  check_cw_params(p);
  if (x.width != y.width || x.height != y.height) fail(Errc::kDimensionMismatch, "CW-SSIM inputs differ in size");
  const auto bx = decompose(x, p.pyramid);
  const auto by = decompose(y, p.pyramid);
  CompensatedSum total;
  int count = 0;
  for (int level : p.pooled_levels) {
    const int ew = x.width >> level;
    const int eh = x.height >> level;
    for (int b = 0; b < p.pyramid.orientations; ++b) {
      const std::size_t i = static_cast<std::size_t>(level) * p.pyramid.orientations + b;
      total.add(band_score(bx[i].grid.data, by[i].grid.data, bx[i].grid.width, ew, eh, p.window, p.k));
      ++count;
    }
  }
  return total.value() / count;
}

}  // namespace vtoff
