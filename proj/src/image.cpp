// Copyright 2026 The capcheck Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "capcheck/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>

#include "capcheck/error.hpp"

namespace capcheck {
namespace {

struct ReadCursor {
  std::string_view data;
  std::size_t pos = 0;
};

void read_fn(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + len > cur->data.size()) png_error(png, "truncated PNG data");
  std::memcpy(out, cur->data.data() + cur->pos, len);
  cur->pos += len;
}

void write_fn(png_structp png, png_bytep in, png_size_t len) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(in), len);
}

void flush_fn(png_structp) {}

void error_fn(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  *err = msg;
  png_longjmp(png, 1);
}

void warning_fn(png_structp, png_const_charp) {}

// Owns a libpng read struct; every decode path shares the setup.
class PngReader {
 public:
  explicit PngReader(std::string_view bytes) : cursor_{bytes} {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
      throw DecodeError("not a PNG image");
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_, error_fn, warning_fn);
    if (!png_) throw DecodeError("png_create_read_struct failed");
    info_ = png_create_info_struct(png_);
    if (!info_) {
      png_destroy_read_struct(&png_, nullptr, nullptr);
      throw DecodeError("png_create_info_struct failed");
    }
    png_set_read_fn(png_, &cursor_, read_fn);
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }
  [[noreturn]] void fail() const { throw DecodeError("PNG decode failed: " + error_); }

 private:
  ReadCursor cursor_;
  std::string error_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

}  // namespace

Image decode_png(std::string_view bytes) {
  PngReader r(bytes);
  png_structp png = r.png();
  png_infop info = r.info();
  Image img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) r.fail();

  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (w == 0 || h == 0) png_error(png, "zero-area image");
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (!(color & PNG_COLOR_MASK_ALPHA) && !png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_filler(png, 0xff, PNG_FILLER_AFTER);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.rgba.assign(std::size_t(w) * h * 4, 0);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = &img.rgba[std::size_t(y) * w * 4];
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return img;
}

std::map<std::string, std::string> png_text_chunks(std::string_view bytes) {
  PngReader r(bytes);
  png_structp png = r.png();
  png_infop info = r.info();
  std::map<std::string, std::string> out;
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) r.fail();

  png_read_info(png, info);
  // Text chunks may follow the image data, so skip through it.
  const png_uint_32 h = png_get_image_height(png, info);
  const int passes = png_set_interlace_handling(png);
  png_read_update_info(png, info);
  row.resize(png_get_rowbytes(png, info));
  for (int p = 0; p < passes; ++p) {
    for (png_uint_32 y = 0; y < h; ++y) png_read_row(png, row.data(), nullptr);
  }
  png_read_end(png, info);

  png_textp text = nullptr;
  int n = png_get_text(png, info, &text, nullptr);
  for (int i = 0; i < n; ++i) {
    std::size_t len = text[i].compression > 0 ? text[i].itxt_length : text[i].text_length;
    out[text[i].key] = std::string(text[i].text, len);
  }
  return out;
}

std::string encode_png(const Image& image, const std::map<std::string, std::string>& text) {
  if (image.width <= 0 || image.height <= 0) throw ContractError("encode_png: empty image");
  std::string out;
  std::string error;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, error_fn, warning_fn);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows;
  std::vector<png_text> chunks;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encode failed: " + error);
  }
  png_set_write_fn(png, &out, write_fn, flush_fn);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGBA,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  for (const auto& [k, v] : text) {
    png_text t{};
    t.compression = PNG_TEXT_COMPRESSION_NONE;
    t.key = const_cast<char*>(k.c_str());
    t.text = const_cast<char*>(v.c_str());
    t.text_length = v.size();
    chunks.push_back(t);
  }
  if (!chunks.empty()) png_set_text(png, info, chunks.data(), static_cast<int>(chunks.size()));
  png_write_info(png, info);
  rows.resize(image.height);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(&image.rgba[std::size_t(y) * image.width * 4]);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

GrayImage to_gray(const Image& image) {
  GrayImage g;
  g.width = image.width;
  g.height = image.height;
  g.values.resize(std::size_t(image.width) * image.height);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const std::uint8_t* p = &image.rgba[i * 4];
    const double a = p[3] / 255.0;
    const double luma = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
    g.values[i] = a * luma + (1.0 - a);
  }
  return g;
}

namespace {

// Coverage weights of source cells [0, src) onto dst cells: entry (d, s, w).
struct Span {
  int first;
  std::vector<double> weights;
};

std::vector<Span> area_weights(int src, int dst) {
  std::vector<Span> spans(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int d = 0; d < dst; ++d) {
    const double lo = d * scale;
    const double hi = (d + 1) * scale;
    int s0 = static_cast<int>(std::floor(lo));
    int s1 = std::min(src, static_cast<int>(std::ceil(hi)));
    spans[d].first = s0;
    double total = 0;
    for (int s = s0; s < s1; ++s) {
      double w = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
      if (w < 0) w = 0;
      spans[d].weights.push_back(w);
      total += w;
    }
    for (double& w : spans[d].weights) w /= total;
  }
  return spans;
}

}  // namespace

GrayImage resize_area(const GrayImage& src, int w, int h) {
  if (src.width <= 0 || src.height <= 0 || w <= 0 || h <= 0) {
    throw ContractError("resize_area: zero-area image");
  }
  const auto xs = area_weights(src.width, w);
  const auto ys = area_weights(src.height, h);
  // Horizontal pass, then vertical.
  std::vector<double> tmp(std::size_t(w) * src.height);
  for (int y = 0; y < src.height; ++y) {
    const double* row = &src.values[std::size_t(y) * src.width];
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (std::size_t k = 0; k < xs[x].weights.size(); ++k) {
        acc += xs[x].weights[k] * row[xs[x].first + k];
      }
      tmp[std::size_t(y) * w + x] = acc;
    }
  }
  GrayImage out;
  out.width = w;
  out.height = h;
  out.values.assign(std::size_t(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (std::size_t k = 0; k < ys[y].weights.size(); ++k) {
      const double wy = ys[y].weights[k];
      const double* row = &tmp[std::size_t(ys[y].first + k) * w];
      for (int x = 0; x < w; ++x) out.values[std::size_t(y) * w + x] += wy * row[x];
    }
  }
  return out;
}

}  // namespace capcheck
