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
#include "vtoff/fft.hpp"

#include <cmath>
#include <numbers>

#include "vtoff/error.hpp"

namespace vtoff {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

FftPlan::FftPlan(int size) : size_(size) {
  if (!is_power_of_two(size)) fail(Errc::kNonPowerOfTwo, "FFT length " + std::to_string(size) + " is not a power of two");
  int bits = 0;
  while ((1 << bits) < size) ++bits;
  bit_reverse_.resize(size);
  for (int i = 0; i < size; ++i) {
    int r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (1 << b)) r |= 1 << (bits - 1 - b);
    bit_reverse_[i] = r;
  }
  twiddles_.resize(size / 2);
  for (int k = 0; k < size / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * k / size;
    twiddles_[k] = Complex(std::cos(a), std::sin(a));
  }
}

void FftPlan::transform(std::span<Complex> data, FftDirection dir) const {
  if (static_cast<int>(data.size()) != size_) fail(Errc::kInvalidParams, "FFT buffer length does not match the plan");
  for (int i = 0; i < size_; ++i)
    if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);
  const bool inverse = dir == FftDirection::kInverse;
  for (int len = 2; len <= size_; len <<= 1) {
    const int half = len / 2;
    const int stride = size_ / len;
    for (int start = 0; start < size_; start += len) {
      for (int k = 0; k < half; ++k) {
        Complex w = twiddles_[static_cast<std::size_t>(k) * stride];
        if (inverse) w = std::conj(w);
        const Complex u = data[start + k];
        const Complex v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / size_;
    for (auto& c : data) c *= inv;
  }
}

ComplexGrid fft2(const ComplexGrid& in, FftDirection dir) {
  if (!is_power_of_two(in.width) || !is_power_of_two(in.height))
    fail(Errc::kNonPowerOfTwo, "fft2 needs power-of-two dimensions");
  const FftPlan row_plan(in.width);
  const FftPlan col_plan(in.height);
  ComplexGrid out = in;
  for (int y = 0; y < out.height; ++y)
    row_plan.transform(std::span<Complex>(&out.at(0, y), static_cast<std::size_t>(out.width)), dir);
  std::vector<Complex> column(out.height);
  for (int x = 0; x < out.width; ++x) {
    for (int y = 0; y < out.height; ++y) column[y] = out.at(x, y);
    col_plan.transform(column, dir);
    for (int y = 0; y < out.height; ++y) out.at(x, y) = column[y];
  }
  return out;
}

ComplexGrid fft2(const Plane& in) {
  ComplexGrid g(in.width, in.height);
  for (std::size_t i = 0; i < in.data.size(); ++i) g.data[i] = Complex(in.data[i], 0.0);
  return fft2(g, FftDirection::kForward);
}

namespace {

ComplexGrid roll(const ComplexGrid& in, int dx, int dy) {
  ComplexGrid out(in.width, in.height);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x)
      out.at((x + dx) % in.width, (y + dy) % in.height) = in.at(x, y);
  return out;
}

}  // namespace

ComplexGrid fftshift(const ComplexGrid& in) { return roll(in, in.width / 2, in.height / 2); }

ComplexGrid ifftshift(const ComplexGrid& in) {
  return roll(in, in.width - in.width / 2, in.height - in.height / 2);
}

}  // namespace vtoff
