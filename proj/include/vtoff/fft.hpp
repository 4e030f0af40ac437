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
#include <span>
#include <vector>

#include "vtoff/image.hpp"

namespace vtoff {

using Complex = std::complex<double>;

struct ComplexGrid {
  int width = 0;
  int height = 0;
  std::vector<Complex> data;

  ComplexGrid() = default;
  ComplexGrid(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h) {}

  Complex& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const Complex& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

enum class FftDirection { kForward, kInverse };

bool is_power_of_two(int n);
int next_power_of_two(int n);

// Radix-2 transform of one length. Immutable after construction, so a plan
// can be shared between threads. The inverse carries the 1/N factor.
class FftPlan {
 public:
  explicit FftPlan(int size);

  int size() const noexcept { return size_; }
  void transform(std::span<Complex> data, FftDirection dir) const;

 private:
  int size_;
  std::vector<int> bit_reverse_;
  std::vector<Complex> twiddles_;
};

ComplexGrid fft2(const ComplexGrid& in, FftDirection dir);
ComplexGrid fft2(const Plane& in);

// Swap quadrants so the zero frequency sits at (w/2, h/2); and back.
ComplexGrid fftshift(const ComplexGrid& in);
ComplexGrid ifftshift(const ComplexGrid& in);

}  // namespace vtoff
