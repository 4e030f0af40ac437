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
#include "vtoff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "vtoff/error.hpp"

namespace vtoff {

Tensor::Tensor(int n, int c, int h, int w, float fill) : shape_{n, c, h, w} {
  if (n < 1 || c < 1 || h < 1 || w < 1) fail(Errc::kShapeMismatch, "tensor dimensions must be >= 1");
  data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
}

std::string Tensor::shape_string() const {
  return "[" + std::to_string(shape_[0]) + "," + std::to_string(shape_[1]) + "," + std::to_string(shape_[2]) + "," +
         std::to_string(shape_[3]) + "]";
}

namespace {

#if defined(__AVX512F__)
constexpr int kVecBytes = 64;
#else
constexpr int kVecBytes = 32;
#endif
constexpr int kVec = kVecBytes / static_cast<int>(sizeof(float));
constexpr int kMR = 6;
constexpr int kNR = 2 * kVec;
constexpr int kKC = 256;
constexpr int kNC = 512;

#if defined(__GNUC__)
typedef float VFloat __attribute__((vector_size(kVecBytes)));

inline VFloat load_vec(const float* p) {
  VFloat v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

inline void store_vec(float* p, VFloat v) { std::memcpy(p, &v, sizeof(v)); }

// C[kMR x kNR] += A_panel * B_panel over kc steps; c has row stride ldc.
void micro_kernel(int kc, const float* a, const float* b, float* c, int ldc) {
  VFloat acc[kMR][2];
  for (int r = 0; r < kMR; ++r) {
    acc[r][0] = load_vec(c + static_cast<std::size_t>(r) * ldc);
    acc[r][1] = load_vec(c + static_cast<std::size_t>(r) * ldc + kVec);
  }
  for (int p = 0; p < kc; ++p) {
    const VFloat b0 = load_vec(b + static_cast<std::size_t>(p) * kNR);
    const VFloat b1 = load_vec(b + static_cast<std::size_t>(p) * kNR + kVec);
    const float* ap = a + static_cast<std::size_t>(p) * kMR;
    for (int r = 0; r < kMR; ++r) {
      acc[r][0] += ap[r] * b0;
      acc[r][1] += ap[r] * b1;
    }
  }
  for (int r = 0; r < kMR; ++r) {
    store_vec(c + static_cast<std::size_t>(r) * ldc, acc[r][0]);
    store_vec(c + static_cast<std::size_t>(r) * ldc + kVec, acc[r][1]);
  }
}
#else
void micro_kernel(int kc, const float* a, const float* b, float* c, int ldc) {
  float acc[kMR][kNR];
  for (int r = 0; r < kMR; ++r)
    for (int j = 0; j < kNR; ++j) acc[r][j] = c[static_cast<std::size_t>(r) * ldc + j];
  for (int p = 0; p < kc; ++p)
    for (int r = 0; r < kMR; ++r)
      for (int j = 0; j < kNR; ++j) acc[r][j] += a[p * kMR + r] * b[p * kNR + j];
  for (int r = 0; r < kMR; ++r)
    for (int j = 0; j < kNR; ++j) c[static_cast<std::size_t>(r) * ldc + j] = acc[r][j];
}
#endif

// Weights [m x k] repacked as kMR-row panels, zero-padded: panel[p][k][r].
std::vector<float> pack_a(int m, int k, const float* a) {
  const int panels = (m + kMR - 1) / kMR;
  std::vector<float> out(static_cast<std::size_t>(panels) * k * kMR, 0.0f);
  for (int p = 0; p < panels; ++p)
    for (int r = 0; r < kMR && p * kMR + r < m; ++r) {
      const float* row = a + static_cast<std::size_t>(p * kMR + r) * k;
      float* dst = out.data() + static_cast<std::size_t>(p) * k * kMR + r;
      for (int i = 0; i < k; ++i) dst[static_cast<std::size_t>(i) * kMR] = row[i];
    }
  return out;
}

// Source of B columns for one GEMM: either a dense matrix or an implicit
// im2col view over one image of the convolution input.
struct BSource {
  virtual ~BSource() = default;
  // Writes rows [k0, k0+kc) of columns [j0, j0+nc) into kNR-wide panels.
  virtual void pack(int k0, int kc, int j0, int nc, float* out) const = 0;
};

struct DenseB final : BSource {
  const float* b;
  int n;
  DenseB(const float* b_, int n_) : b(b_), n(n_) {}
  void pack(int k0, int kc, int j0, int nc, float* out) const override {
    const int panels = (nc + kNR - 1) / kNR;
    for (int p = 0; p < panels; ++p) {
      const int cols = std::min(kNR, nc - p * kNR);
      float* dst = out + static_cast<std::size_t>(p) * kc * kNR;
      for (int i = 0; i < kc; ++i) {
        const float* src = b + static_cast<std::size_t>(k0 + i) * n + j0 + p * kNR;
        float* d = dst + static_cast<std::size_t>(i) * kNR;
        std::memcpy(d, src, sizeof(float) * cols);
        std::fill(d + cols, d + kNR, 0.0f);
      }
    }
  }
};

struct Im2colB final : BSource {
  const float* x;  // one image, [c, h, w]
  int h, w, kh, kw, stride, pad, out_w;
  Im2colB(const float* x_, int h_, int w_, int kh_, int kw_, int stride_, int pad_, int out_w_)
      : x(x_), h(h_), w(w_), kh(kh_), kw(kw_), stride(stride_), pad(pad_), out_w(out_w_) {}

  void pack(int k0, int kc, int j0, int nc, float* out) const override {
    const int panels = (nc + kNR - 1) / kNR;
    std::fill(out, out + static_cast<std::size_t>(panels) * kc * kNR, 0.0f);
    for (int i = 0; i < kc; ++i) {
      const int k = k0 + i;
      const int ci = k / (kh * kw);
      const int ky = (k / kw) % kh;
      const int kx = k % kw;
      const float* src = x + static_cast<std::size_t>(ci) * h * w;
      int oy = j0 / out_w;
      int ox = j0 % out_w;
      int jj = 0;
      while (jj < nc) {
        const int seg = std::min(out_w - ox, nc - jj);
        const int iy = oy * stride - pad + ky;
        if (iy >= 0 && iy < h) {
          const float* row = src + static_cast<std::size_t>(iy) * w;
          // Output columns t in [lo, hi) of this run read inside the row.
          const int base = ox * stride - pad + kx;
          int lo = 0;
          while (lo < seg && base + lo * stride < 0) ++lo;
          int hi = seg;
          while (hi > lo && base + (hi - 1) * stride >= w) --hi;
          int t = lo;
          while (t < hi) {
            const int pos = jj + t;
            const int lane = pos % kNR;
            const int run = std::min(hi - t, kNR - lane);
            float* dst = out + (static_cast<std::size_t>(pos / kNR) * kc + i) * kNR + lane;
            if (stride == 1) {
              std::memcpy(dst, row + base + t, sizeof(float) * run);
            } else {
              for (int r = 0; r < run; ++r) dst[r] = row[base + (t + r) * stride];
            }
            t += run;
          }
        }
        jj += seg;
        ox = 0;
        ++oy;
      }
    }
  }
};

void gemm_packed(int m, int n, int k, const std::vector<float>& packed_a, const BSource& bsrc, float* c) {
  const int a_panels = (m + kMR - 1) / kMR;
  std::vector<float> packed_b(static_cast<std::size_t>((kNC + kNR - 1) / kNR) * kKC * kNR);
  float tile[kMR * kNR];
  for (int j0 = 0; j0 < n; j0 += kNC) {
    const int nc = std::min(kNC, n - j0);
    const int b_panels = (nc + kNR - 1) / kNR;
    for (int k0 = 0; k0 < k; k0 += kKC) {
      const int kc = std::min(kKC, k - k0);
      bsrc.pack(k0, kc, j0, nc, packed_b.data());
      for (int ap = 0; ap < a_panels; ++ap) {
        const float* a = packed_a.data() + (static_cast<std::size_t>(ap) * k + k0) * kMR;
        const int rows = std::min(kMR, m - ap * kMR);
        for (int bp = 0; bp < b_panels; ++bp) {
          const float* b = packed_b.data() + static_cast<std::size_t>(bp) * kc * kNR;
          const int cols = std::min(kNR, nc - bp * kNR);
          float* cdst = c + static_cast<std::size_t>(ap * kMR) * n + j0 + bp * kNR;
          if (rows == kMR && cols == kNR) {
            micro_kernel(kc, a, b, cdst, n);
            continue;
          }
          std::fill(std::begin(tile), std::end(tile), 0.0f);
          for (int r = 0; r < rows; ++r)
            std::memcpy(tile + r * kNR, cdst + static_cast<std::size_t>(r) * n, sizeof(float) * cols);
          micro_kernel(kc, a, b, tile, kNR);
          for (int r = 0; r < rows; ++r)
            std::memcpy(cdst + static_cast<std::size_t>(r) * n, tile + r * kNR, sizeof(float) * cols);
        }
      }
    }
  }
}

struct ConvGeometry {
  int out_h;
  int out_w;
};

ConvGeometry check_conv(const Tensor& x, const Tensor& weight, std::span<const float> bias, const ConvParams& p) {
  if (weight.c() != x.c())
    fail(Errc::kShapeMismatch, "conv2d: input has " + std::to_string(x.c()) + " channels, kernel expects " +
                                   std::to_string(weight.c()));
  if (!bias.empty() && static_cast<int>(bias.size()) != weight.n())
    fail(Errc::kShapeMismatch, "conv2d: bias length does not match output channels");
  if (p.stride < 1 || p.pad < 0) fail(Errc::kInvalidParams, "conv2d: bad stride or padding");
  const int oh = (x.h() + 2 * p.pad - weight.h()) / p.stride + 1;
  const int ow = (x.w() + 2 * p.pad - weight.w()) / p.stride + 1;
  if (oh < 1 || ow < 1) fail(Errc::kShapeMismatch, "conv2d: kernel larger than padded input");
  return {oh, ow};
}

}  // namespace

void gemm_accumulate(int m, int n, int k, const float* a, const float* b, float* c) {
  gemm_packed(m, n, k, pack_a(m, k, a), DenseB(b, n), c);
}

Tensor conv2d(const Tensor& x, const Tensor& weight, std::span<const float> bias, const ConvParams& p) {
  const auto g = check_conv(x, weight, bias, p);
  const int m = weight.n();
  const int k = weight.c() * weight.h() * weight.w();
  const int n = g.out_h * g.out_w;
  Tensor out(x.n(), m, g.out_h, g.out_w);
  const std::vector<float> packed_a = pack_a(m, k, weight.data().data());
  for (int img = 0; img < x.n(); ++img) {
    for (int co = 0; co < m; ++co) std::fill_n(out.plane(img, co), n, bias.empty() ? 0.0f : bias[co]);
    const Im2colB src(x.plane(img, 0), x.h(), x.w(), weight.h(), weight.w(), p.stride, p.pad, g.out_w);
    gemm_packed(m, n, k, packed_a, src, out.plane(img, 0));
  }
  return out;
}

Tensor conv2d_reference(const Tensor& x, const Tensor& weight, std::span<const float> bias, const ConvParams& p) {
  const auto g = check_conv(x, weight, bias, p);
  Tensor out(x.n(), weight.n(), g.out_h, g.out_w);
  for (int img = 0; img < x.n(); ++img)
    for (int co = 0; co < weight.n(); ++co)
      for (int oy = 0; oy < g.out_h; ++oy)
        for (int ox = 0; ox < g.out_w; ++ox) {
          double acc = bias.empty() ? 0.0 : bias[co];
          for (int ci = 0; ci < x.c(); ++ci)
            for (int ky = 0; ky < weight.h(); ++ky)
              for (int kx = 0; kx < weight.w(); ++kx) {
                const int iy = oy * p.stride - p.pad + ky;
                const int ix = ox * p.stride - p.pad + kx;
                if (iy < 0 || iy >= x.h() || ix < 0 || ix >= x.w()) continue;
                acc += static_cast<double>(weight.at(co, ci, ky, kx)) * x.at(img, ci, iy, ix);
              }
          out.at(img, co, oy, ox) = static_cast<float>(acc);
        }
  return out;
}

Tensor pool(const Tensor& x, PoolMode mode) {
  const int oh = std::max(1, x.h() / 2);
  const int ow = std::max(1, x.w() / 2);
  Tensor out(x.n(), x.c(), oh, ow);
  if (mode == PoolMode::kMax) {
    for (int n = 0; n < x.n(); ++n)
      for (int c = 0; c < x.c(); ++c)
        for (int y = 0; y < oh; ++y)
          for (int xx = 0; xx < ow; ++xx) {
            float m = x.at(n, c, 2 * y, 2 * xx);
            for (int dy = 0; dy < 2 && 2 * y + dy < x.h(); ++dy)
              for (int dx = 0; dx < 2 && 2 * xx + dx < x.w(); ++dx) m = std::max(m, x.at(n, c, 2 * y + dy, 2 * xx + dx));
            out.at(n, c, y, xx) = m;
          }
    return out;
  }
  // Hann window [0.5, 1, 0.5] outer product, normalized to sum 1.
  constexpr float k1[3] = {0.5f, 1.0f, 0.5f};
  float kern[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) kern[i][j] = k1[i] * k1[j] / 4.0f;
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx) {
          float acc = 0.0f;
          float wsum = 0.0f;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int iy = 2 * y + dy, ix = 2 * xx + dx;
              if (iy < 0 || iy >= x.h() || ix < 0 || ix >= x.w()) continue;
              const float v = x.at(n, c, iy, ix);
              acc += kern[dy + 1][dx + 1] * v * v;
              wsum += kern[dy + 1][dx + 1];
            }
          // Border windows renormalize over the taps that fall inside.
          out.at(n, c, y, xx) = std::sqrt(acc / wsum + 1e-12f);
        }
  return out;
}

void relu_inplace(Tensor& x) noexcept {
  for (float& v : x.data()) v = std::max(v, 0.0f);
}

}  // namespace vtoff
