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
#include <span>
#include <string>
#include <vector>

namespace vtoff {

// Rank-4 float32 tensor in NCHW order, contiguous.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, float fill = 0.0f);

  int n() const noexcept { return shape_[0]; }
  int c() const noexcept { return shape_[1]; }
  int h() const noexcept { return shape_[2]; }
  int w() const noexcept { return shape_[3]; }
  const std::array<int, 4>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  float* plane(int n, int c) noexcept { return data_.data() + offset(n, c); }
  const float* plane(int n, int c) const noexcept { return data_.data() + offset(n, c); }

  float& at(int n, int c, int y, int x) noexcept { return data_[offset(n, c) + static_cast<std::size_t>(y) * w() + x]; }
  float at(int n, int c, int y, int x) const noexcept {
    return data_[offset(n, c) + static_cast<std::size_t>(y) * w() + x];
  }

  std::string shape_string() const;

 private:
  std::size_t offset(int n, int c) const noexcept {
    return (static_cast<std::size_t>(n) * shape_[1] + c) * static_cast<std::size_t>(shape_[2]) * shape_[3];
  }

  std::array<int, 4> shape_ = {0, 0, 0, 0};
  std::vector<float> data_;
};

struct ConvParams {
  int stride = 1;
  int pad = 1;
};

// Cross-correlation, weights [out, in, kh, kw], one bias per output channel
// (empty bias = zero). Lowered to im2col + a packed blocked GEMM.
Tensor conv2d(const Tensor& x, const Tensor& weight, std::span<const float> bias, const ConvParams& p = {});

// Direct loop nest with the same semantics. Slow; kept for verification.
Tensor conv2d_reference(const Tensor& x, const Tensor& weight, std::span<const float> bias, const ConvParams& p = {});

enum class PoolMode { kMax, kL2 };

// 2x2/stride-2 max pooling, or L2 pooling: sqrt of a normalized 3x3 Hann
// blur of the squared input sampled at stride 2. Odd trailing rows/cols
// are dropped from the output grid.
Tensor pool(const Tensor& x, PoolMode mode);

void relu_inplace(Tensor& x) noexcept;

// C = A * B for row-major A [m x k], B [k x n], accumulated into C (which the
// caller initializes). Summation order per element is fixed.
void gemm_accumulate(int m, int n, int k, const float* a, const float* b, float* c);

}  // namespace vtoff
