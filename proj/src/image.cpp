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
#include "vtoff/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "vtoff/error.hpp"

namespace vtoff {

Image::Image(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 3, fill) {
  if (width < 1 || height < 1) fail(Errc::kInvalidParams, "image dimensions must be positive");
}

Image::Image(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), data_(std::move(rgb)) {
  if (width < 1 || height < 1) fail(Errc::kInvalidParams, "image dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(width) * height * 3)
    fail(Errc::kInvalidParams, "image buffer length does not match width*height*3");
}

namespace {

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && std::memcmp(b.data(), kPngMagic, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

// ---------------------------------------------------------------------------
// PNG

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
  char message[256] = {};
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->offset + len > st->bytes.size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, st->bytes.data() + st->offset, len);
  st->offset += len;
}

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* st = static_cast<PngReadState*>(png_get_error_ptr(png));
  if (st != nullptr) std::snprintf(st->message, sizeof(st->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

enum class PngOutcome { kOk, kCorrupt, kNotThreeChannel };

// Kept free of non-trivial locals: libpng reports errors by longjmp.
PngOutcome decode_png_raw(PngReadState& st, bool auto_expand, std::vector<std::uint8_t>& out,
                          png_uint_32& width, png_uint_32& height) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, png_error_handler,
                                           png_warning_handler);
  if (png == nullptr) return PngOutcome::kCorrupt;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return PngOutcome::kCorrupt;
  }
  std::vector<png_bytep>* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return PngOutcome::kCorrupt;
  }
  png_set_read_fn(png, &st, png_read_from_span);
  png_read_info(png, info);

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const bool has_trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  const bool is_gray = (color_type & PNG_COLOR_MASK_COLOR) == 0;
  const bool has_alpha = (color_type & PNG_COLOR_MASK_ALPHA) != 0 || has_trns;
  if ((is_gray || has_alpha) && !auto_expand) {
    png_destroy_read_struct(&png, &info, nullptr);
    return PngOutcome::kNotThreeChannel;
  }

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (is_gray && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (is_gray) png_set_gray_to_rgb(png);
  if (has_trns) png_set_tRNS_to_alpha(png);
  if (has_alpha) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(width) * 3) png_error(png, "unexpected row layout");
  out.resize(static_cast<std::size_t>(width) * height * 3);
  rows = new std::vector<png_bytep>(height);
  for (png_uint_32 y = 0; y < height; ++y) (*rows)[y] = out.data() + static_cast<std::size_t>(y) * width * 3;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  delete rows;
  png_destroy_read_struct(&png, &info, nullptr);
  return PngOutcome::kOk;
}

Image decode_png(std::span<const std::uint8_t> bytes, const DecodeOptions& opts) {
  PngReadState st;
  st.bytes = bytes;
  std::vector<std::uint8_t> rgb;
  png_uint_32 w = 0, h = 0;
  switch (decode_png_raw(st, opts.auto_expand, rgb, w, h)) {
    case PngOutcome::kOk:
      break;
    case PngOutcome::kNotThreeChannel:
      fail(Errc::kNotThreeChannel, "PNG is grayscale or carries alpha");
    case PngOutcome::kCorrupt:
      fail(Errc::kCorruptFile, std::string("PNG decode failed: ") + st.message);
  }
  if (w == 0 || h == 0 || w > (1u << 15) || h > (1u << 15)) fail(Errc::kCorruptFile, "PNG dimensions out of range");
  return Image(static_cast<int>(w), static_cast<int>(h), std::move(rgb));
}

// ---------------------------------------------------------------------------
// JPEG

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Warnings (premature EOF, corrupt data) are counted in num_warnings and
// turned into CorruptFile after decoding.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) cinfo->err->num_warnings++;
}

enum class JpegOutcome { kOk, kCorrupt, kNotThreeChannel, kUnsupported };

JpegOutcome decode_jpeg_raw(std::span<const std::uint8_t> bytes, bool auto_expand, JpegError& err,
                            std::vector<std::uint8_t>& out, JDIMENSION& width, JDIMENSION& height) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_emit_message;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return JpegOutcome::kCorrupt;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_GRAYSCALE && !auto_expand) {
    jpeg_destroy_decompress(&cinfo);
    return JpegOutcome::kNotThreeChannel;
  }
  if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
    jpeg_destroy_decompress(&cinfo);
    return JpegOutcome::kUnsupported;
  }
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  out.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  const bool warned = cinfo.err->num_warnings > 0;
  jpeg_destroy_decompress(&cinfo);
  if (warned) {
    std::snprintf(err.message, sizeof(err.message), "JPEG stream is truncated or damaged");
    return JpegOutcome::kCorrupt;
  }
  return JpegOutcome::kOk;
}

Image decode_jpeg(std::span<const std::uint8_t> bytes, const DecodeOptions& opts) {
  JpegError err;
  std::vector<std::uint8_t> rgb;
  JDIMENSION w = 0, h = 0;
  switch (decode_jpeg_raw(bytes, opts.auto_expand, err, rgb, w, h)) {
    case JpegOutcome::kOk:
      break;
    case JpegOutcome::kNotThreeChannel:
      fail(Errc::kNotThreeChannel, "JPEG is grayscale");
    case JpegOutcome::kUnsupported:
      fail(Errc::kUnsupportedFormat, "CMYK/YCCK JPEG is not supported");
    case JpegOutcome::kCorrupt:
      fail(Errc::kCorruptFile, std::string("JPEG decode failed: ") + err.message);
  }
  return Image(static_cast<int>(w), static_cast<int>(h), std::move(rgb));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------
// Resampling

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

double linear_kernel(double x) {
  x = std::abs(x);
  return x < 1.0 ? 1.0 - x : 0.0;
}

struct Taps {
  int first = 0;
  std::vector<double> weights;
};

// Antialiased separable resampling: the kernel is widened by the scale
// factor when downsampling; out-of-range taps clamp to the edge sample.
std::vector<Taps> compute_taps(int in_size, int out_size, Interpolation interp) {
  const double support_base = interp == Interpolation::kBicubic ? 2.0 : 1.0;
  const double scale = static_cast<double>(in_size) / out_size;
  const double filter_scale = std::max(scale, 1.0);
  const double support = support_base * filter_scale;
  std::vector<Taps> taps(out_size);
  for (int i = 0; i < out_size; ++i) {
    const double center = (i + 0.5) * scale;
    const int first = static_cast<int>(std::floor(center - support + 0.5));
    const int last = static_cast<int>(std::floor(center + support + 0.5));
    Taps& t = taps[i];
    t.first = first;
    double total = 0.0;
    for (int x = first; x < last; ++x) {
      const double arg = (x - center + 0.5) / filter_scale;
      const double w = interp == Interpolation::kBicubic ? cubic_kernel(arg) : linear_kernel(arg);
      t.weights.push_back(w);
      total += w;
    }
    if (total != 0.0)
      for (double& w : t.weights) w /= total;
  }
  return taps;
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes, const DecodeOptions& opts) {
  if (is_png(bytes)) return decode_png(bytes, opts);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, opts);
  fail(Errc::kUnsupportedFormat, "not a PNG or JPEG stream");
}

Image load_image(const std::filesystem::path& path, const DecodeOptions& opts) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes, opts);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_png(const Image& img, const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (fp == nullptr) fail(Errc::kIo, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    fail(Errc::kIo, "PNG encode failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height(); ++y) png_write_row(png, const_cast<png_bytep>(img.pixel(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) fail(Errc::kIo, "cannot finish " + path.string());
}

void save_jpeg(const Image& img, const std::filesystem::path& path, int quality) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (fp == nullptr) fail(Errc::kIo, "cannot write " + path.string());
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, fp);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(img.pixel(0, static_cast<int>(cinfo.next_scanline)));
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  if (std::fclose(fp) != 0) fail(Errc::kIo, "cannot finish " + path.string());
}

Plane to_luma(const Image& img) {
  Plane out(img.width(), img.height(), SampleRange::kByte);
  const auto src = img.data();
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    out.data[i] = static_cast<float>(y);
  }
  return out;
}

Plane channel_plane(const Image& img, int channel, SampleRange range) {
  if (channel < 0 || channel > 2) fail(Errc::kInvalidParams, "channel index must be 0..2");
  Plane out(img.width(), img.height(), range);
  const auto src = img.data();
  const double scale = range == SampleRange::kUnit ? 255.0 : 1.0;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = static_cast<float>(src[3 * i + channel] / scale);
  return out;
}

Image pad_to_square(const Image& img, const GeometrySpec& spec) {
  const int w = img.width(), h = img.height();
  if (w == h) return img;
  const int side = std::max(w, h);
  Image out(side, side, spec.pad_fill);
  const int ox = (side - w) / 2;
  const int oy = (side - h) / 2;
  for (int y = 0; y < h; ++y)
    std::memcpy(out.pixel(ox, oy + y), img.pixel(0, y), static_cast<std::size_t>(w) * 3);
  return out;
}

Image resize(const Image& img, int width, int height, const GeometrySpec& spec) {
  if (width < 1 || height < 1) fail(Errc::kInvalidParams, "resize target must be positive");
  if (width == img.width() && height == img.height()) return img;

  const int iw = img.width(), ih = img.height();
  const auto htaps = compute_taps(iw, width, spec.interpolation);
  const auto vtaps = compute_taps(ih, height, spec.interpolation);

  // Horizontal pass into a double buffer, vertical pass rounds once.
  std::vector<double> tmp(static_cast<std::size_t>(width) * ih * 3);
  for (int y = 0; y < ih; ++y) {
    for (int x = 0; x < width; ++x) {
      const Taps& t = htaps[x];
      double acc[3] = {0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < t.weights.size(); ++k) {
        const int sx = std::clamp(t.first + static_cast<int>(k), 0, iw - 1);
        const std::uint8_t* p = img.pixel(sx, y);
        for (int c = 0; c < 3; ++c) acc[c] += t.weights[k] * p[c];
      }
      double* dst = &tmp[(static_cast<std::size_t>(y) * width + x) * 3];
      for (int c = 0; c < 3; ++c) dst[c] = acc[c];
    }
  }
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    const Taps& t = vtaps[y];
    for (int x = 0; x < width; ++x) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < t.weights.size(); ++k) {
        const int sy = std::clamp(t.first + static_cast<int>(k), 0, ih - 1);
        const double* p = &tmp[(static_cast<std::size_t>(sy) * width + x) * 3];
        for (int c = 0; c < 3; ++c) acc[c] += t.weights[k] * p[c];
      }
      std::uint8_t* d = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) d[c] = to_u8(acc[c]);
    }
  }
  return out;
}

Image square_and_resize(const Image& img, const GeometrySpec& spec) {
  if (spec.target_size < 16) fail(Errc::kInvalidParams, "target_size must be at least 16");
  return resize(pad_to_square(img, spec), spec.target_size, spec.target_size, spec);
}

}  // namespace vtoff
