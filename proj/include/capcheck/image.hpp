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

#ifndef CAPCHECK_IMAGE_HPP_
#define CAPCHECK_IMAGE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace capcheck {

// 8-bit RGBA raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgba(std::size_t(w) * h * 4, 255) {}

  std::uint8_t* pixel(int x, int y) { return &rgba[(std::size_t(y) * width + x) * 4]; }
  const std::uint8_t* pixel(int x, int y) const {
    return &rgba[(std::size_t(y) * width + x) * 4];
  }
};

// Intensity in [0, 1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

// Any PNG color type/bit depth, expanded to RGBA8. Throws DecodeError.
Image decode_png(std::string_view bytes);

std::string encode_png(const Image& image,
                       const std::map<std::string, std::string>& text = {});

// tEXt/iTXt/zTXt chunks of a PNG. Throws DecodeError.
std::map<std::string, std::string> png_text_chunks(std::string_view bytes);

// Rec. 601 luma, with alpha composited over white.
GrayImage to_gray(const Image& image);

// Area-averaging resample to exactly (w, h); aspect ratio is not preserved.
// Linear in the input, so resize(1 - x) == 1 - resize(x).
GrayImage resize_area(const GrayImage& src, int w, int h);

}  // namespace capcheck

#endif  // CAPCHECK_IMAGE_HPP_
