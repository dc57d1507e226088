#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "autocrop/error.hpp"
#include "autocrop/imaging.hpp"

namespace autocrop {
namespace {

Image random_image(int w, int h, std::uint32_t seed, bool quantized = true) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  Image img(w, h);
  for (float& v : img.pixels()) v = quantized ? byte(rng) / 255.0f : std::uniform_real_distribution<float>(0, 1)(rng);
  return img;
}

TEST(Ppm, RoundTripPreservesBytes) {
  const Image img = random_image(13, 7, 1);
  const std::string bytes = encode_ppm(img);
  EXPECT_EQ(decode_ppm(bytes), img);
  EXPECT_EQ(encode_ppm(decode_ppm(bytes)), bytes);

  const auto path = std::filesystem::temp_directory_path() / "autocrop_roundtrip.ppm";
  save_ppm(img, path);
  EXPECT_EQ(load_ppm(path), img);
  std::filesystem::remove(path);
}

TEST(Ppm, MinimalWhitePixel) {
  const std::string bytes = std::string("P6\n1 1\n255\n") + std::string(3, '\xff');
  const Image img = decode_ppm(bytes);
  EXPECT_EQ(img.width(), 1);
  EXPECT_EQ(img.height(), 1);
  EXPECT_EQ(std::vector<float>(img.pixels().begin(), img.pixels().end()), (std::vector<float>{1, 1, 1}));
}

TEST(Ppm, HeaderCommentsAreSkipped) {
  const std::string bytes = std::string("P6 # comment\n2 # w\n1\n255\n") + std::string(6, '\0');
  EXPECT_EQ(decode_ppm(bytes).width(), 2);
}

TEST(Ppm, RejectsUnsupportedAndMalformedInput) {
  EXPECT_THROW(decode_ppm("P3\n1 1\n255\n255 255 255\n"), ParseError);
  EXPECT_THROW(decode_ppm("P6\n1 1\n65535\n" + std::string(6, '\0')), ParseError);
  EXPECT_THROW(decode_ppm("P6\nx 1\n255\n"), ParseError);
  try {
    decode_ppm("P6\n2 2\n255\n" + std::string(5, '\0'));
    FAIL() << "truncated payload accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 16u);
  }
  EXPECT_THROW(load_ppm("/nonexistent/file.ppm"), IoError);
}

TEST(CropExtract, FullFrameIsIdentity) {
  const Image img = random_image(37, 23, 2);
  EXPECT_EQ(crop_extract(img, full_frame(img.dims())), img);
}

TEST(CropExtract, LeftHalfMatchesDirectCopy) {
  const Image img = random_image(4, 4, 3);
  const Image left = crop_extract(img, {0, 0, 0.5, 1.0});
  ASSERT_EQ(left.width(), 2);
  ASSERT_EQ(left.height(), 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 2; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_EQ(left.at(x, y, c), img.at(x, y, c));
}

TEST(CropExtract, OutOfBoundsRegionIsClamped) {
  const Image img = random_image(50, 40, 4);
  const Image out = crop_extract(img, {-0.3, 0.7, 0.05, 1.4});
  EXPECT_EQ(out.width(), kMinCropSide);
  EXPECT_EQ(out.height(), kMinCropSide);
  EXPECT_EQ(out.at(0, 0, 0), img.at(0, 40 - kMinCropSide, 0));
}

TEST(DownscaleCap, UnderCapIsIdentity) {
  const Image img = random_image(100, 80, 5);
  EXPECT_EQ(downscale_cap(img, 256), img);
}

TEST(DownscaleCap, FactorTwoMatchesBlockMean) {
  const Image img = random_image(512, 256, 6);
  const Image out = downscale_cap(img, 256);
  ASSERT_EQ(out.width(), 256);
  ASSERT_EQ(out.height(), 128);
  double total_in = 0.0;
  double total_out = 0.0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 256; ++x)
      for (int c = 0; c < 3; ++c) {
        const double mean = (static_cast<double>(img.at(2 * x, 2 * y, c)) + img.at(2 * x + 1, 2 * y, c) +
                             img.at(2 * x, 2 * y + 1, c) + img.at(2 * x + 1, 2 * y + 1, c)) /
                            4.0;
        ASSERT_NEAR(out.at(x, y, c), mean, 1e-6);
        total_out += out.at(x, y, c);
      }
  for (float v : img.pixels()) total_in += v;
  EXPECT_NEAR(total_in / img.pixels().size(), total_out / out.pixels().size(), 1e-6);
}

TEST(DownscaleCap, ConstantStaysConstantAndAspectIsKept) {
  Image img(300, 170);
  std::fill(img.pixels().begin(), img.pixels().end(), 0.375f);
  const Image out = downscale_cap(img, 64);
  EXPECT_EQ(out.width(), 64);
  EXPECT_EQ(out.height(), 36);  // 170 * 64 / 300 = 36.27
  for (float v : out.pixels()) ASSERT_NEAR(v, 0.375f, 1e-6);
  EXPECT_THROW(downscale_cap(img, 16), ConfigError);
}

TEST(Hflip, SwapsColumnsAndIsInvolution) {
  Image two(2, 1, {0.1f, 0.2f, 0.3f, 0.7f, 0.8f, 0.9f});
  EXPECT_EQ(hflip(two), Image(2, 1, {0.7f, 0.8f, 0.9f, 0.1f, 0.2f, 0.3f}));
  const Image img = random_image(17, 9, 7);
  EXPECT_EQ(hflip(hflip(img)), img);

  auto sorted = [](const Image& i) {
    std::vector<float> v(i.pixels().begin(), i.pixels().end());
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(hflip(img)), sorted(img));
}

TEST(Hflip, ColumnConstantImageUnchanged) {
  Image img(6, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 0.1f * y + 0.01f * c;
  EXPECT_EQ(hflip(img), img);
}

TEST(PadTo, CentersContent) {
  Image img(2, 2);
  std::fill(img.pixels().begin(), img.pixels().end(), 1.0f);
  const Image out = pad_to(img, 4, 6);
  EXPECT_EQ(out.width(), 4);
  EXPECT_EQ(out.height(), 6);
  EXPECT_EQ(out.at(1, 2, 0), 1.0f);
  EXPECT_EQ(out.at(0, 0, 0), 0.0f);
}

}  // namespace
}  // namespace autocrop
