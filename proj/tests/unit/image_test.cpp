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

#include <gtest/gtest.h>

#include "capcheck/error.hpp"
#include "capcheck/image.hpp"
#include "test_util.hpp"

namespace capcheck {
namespace {

TEST(ImageTest, PngRoundTripPreservesPixelsAndText) {
  const Image img = testing::synthetic_chart(11, 37, 23);
  const std::string png = encode_png(img, {{"capcheck:text", "[\"a\"]"}, {"k", "v"}});
  const Image back = decode_png(png);
  EXPECT_EQ(back.width, 37);
  EXPECT_EQ(back.height, 23);
  EXPECT_EQ(back.rgba, img.rgba);
  const auto chunks = png_text_chunks(png);
  EXPECT_EQ(chunks.at("capcheck:text"), "[\"a\"]");
  EXPECT_EQ(chunks.at("k"), "v");
}

TEST(ImageTest, EncodingIsDeterministic) {
  const Image img = testing::synthetic_chart(5);
  EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(ImageTest, GarbageIsDecodeError) {
  EXPECT_THROW(decode_png("not a png"), DecodeError);
  EXPECT_THROW(decode_png(""), DecodeError);
  EXPECT_THROW(png_text_chunks("nope"), DecodeError);
}

TEST(ImageTest, GrayUsesLumaWeights) {
  Image img(2, 1);
  auto* p = img.pixel(0, 0);
  p[0] = 255;
  p[1] = 0;
  p[2] = 0;
  const GrayImage g = to_gray(img);
  EXPECT_NEAR(g.values[0], 0.299, 1e-9);
  EXPECT_NEAR(g.values[1], 1.0, 1e-9);
}

TEST(ImageTest, TransparentPixelsCompositeOverWhite) {
  Image img(1, 1);
  auto* p = img.pixel(0, 0);
  p[0] = p[1] = p[2] = 0;
  p[3] = 0;
  EXPECT_NEAR(to_gray(img).values[0], 1.0, 1e-9);
}

TEST(ImageTest, AreaResizePreservesMean) {
  const GrayImage g = to_gray(testing::synthetic_chart(3, 90, 70));
  const GrayImage r = resize_area(g, 16, 16);
  ASSERT_EQ(r.values.size(), 256u);
  double m1 = 0, m2 = 0;
  for (double v : g.values) m1 += v;
  for (double v : r.values) m2 += v;
  EXPECT_NEAR(m1 / g.values.size(), m2 / r.values.size(), 1e-6);
}

TEST(ImageTest, AreaResizeOfConstantIsConstant) {
  GrayImage g{5, 3, std::vector<double>(15, 42.0)};
  for (double v : resize_area(g, 7, 2).values) EXPECT_NEAR(v, 42.0, 1e-9);
}

}  // namespace
}  // namespace capcheck
