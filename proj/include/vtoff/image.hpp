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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vtoff {

// Decoded 8-bit sRGB raster, row-major, interleaved RGB.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0);
  Image(int width, int height, std::vector<std::uint8_t> rgb);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t* pixel(int x, int y) noexcept { return &data_[(static_cast<std::size_t>(y) * width_ + x) * 3]; }
  const std::uint8_t* pixel(int x, int y) const noexcept {
    return &data_[(static_cast<std::size_t>(y) * width_ + x) * 3];
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class SampleRange { kUnit, kByte };

// Single-channel float raster with its declared sample range.
struct Plane {
  int width = 0;
  int height = 0;
  SampleRange range = SampleRange::kByte;
  std::vector<float> data;

  Plane() = default;
  Plane(int w, int h, SampleRange r = SampleRange::kByte, float fill = 0.0f)
      : width(w), height(h), range(r), data(static_cast<std::size_t>(w) * h, fill) {}

  float& at(int x, int y) noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
};

enum class Interpolation { kBicubic, kBilinear };

struct GeometrySpec {
  std::uint8_t pad_fill = 255;
  int target_size = 512;
  Interpolation interpolation = Interpolation::kBicubic;
};

struct DecodeOptions {
  // Expand grayscale to RGB and drop alpha instead of rejecting the file.
  bool auto_expand = false;
};

Image load_image(const std::filesystem::path& path, const DecodeOptions& opts = {});
Image decode_image(std::span<const std::uint8_t> bytes, const DecodeOptions& opts = {});

void save_png(const Image& img, const std::filesystem::path& path);
void save_jpeg(const Image& img, const std::filesystem::path& path, int quality = 95);

// Rec.601 luma in [0,255].
Plane to_luma(const Image& img);

// One colour channel as a plane, in [0,1] or [0,255].
Plane channel_plane(const Image& img, int channel, SampleRange range);

Image pad_to_square(const Image& img, const GeometrySpec& spec = {});
Image resize(const Image& img, int width, int height, const GeometrySpec& spec = {});

// Pads to a square and resizes to spec.target_size.
Image square_and_resize(const Image& img, const GeometrySpec& spec);

}  // namespace vtoff
