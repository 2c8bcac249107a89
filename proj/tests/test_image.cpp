#include "gea/error.hpp"
#include "gea/image.hpp"
#include "gea/image_io.hpp"

#include "synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace gea;

namespace {

ImageBuffer pixel_rgb(double r, double g, double b) { return ImageBuffer(1, 1, 3, {r, g, b}); }

}  // namespace

TEST(ImageBuffer, RejectsBadShapesAndValues) {
  EXPECT_THROW(ImageBuffer(2, 2, 2), InvalidInput);
  EXPECT_THROW(ImageBuffer(2, 2, 3, std::vector<double>(11)), InvalidInput);
  EXPECT_THROW(ImageBuffer(1, 1, 1, {std::numeric_limits<double>::quiet_NaN()}), InvalidInput);
  EXPECT_THROW(ImageBuffer(1, 1, 1, {std::numeric_limits<double>::infinity()}), InvalidInput);
}

TEST(ImageBuffer, CropAndChannel) {
  ImageBuffer img(4, 5, 3);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c)
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = 100 * r + 10 * c + ch;
  const ImageBuffer sub = img.crop(1, 2, 2, 3);
  EXPECT_EQ(sub.height(), 2);
  EXPECT_EQ(sub.width(), 3);
  EXPECT_EQ(sub.at(0, 0, 1), 121);
  EXPECT_EQ(sub.at(1, 2, 2), 242);
  EXPECT_THROW(img.crop(3, 0, 2, 1), InvalidInput);
  const ImageBuffer g = img.channel(1);
  EXPECT_EQ(g.channels(), 1);
  EXPECT_EQ(g.at(3, 4), 341);
}

TEST(Yuv, KnownColours) {
  const YuvImage black = rgb_to_yuv(pixel_rgb(0, 0, 0));
  EXPECT_EQ(black.y.at(0, 0), 0.0);
  EXPECT_EQ(black.u.at(0, 0), 0.0);
  EXPECT_EQ(black.v.at(0, 0), 0.0);

  const YuvImage white = rgb_to_yuv(pixel_rgb(1, 1, 1));
  EXPECT_NEAR(white.y.at(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(white.u.at(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(white.v.at(0, 0), 0.0, 1e-15);

  // Direct evaluation: U = 0.5 (B - Y) / (1 - 0.114), V = 0.5 (R - Y) / (1 - 0.299).
  const YuvImage red = rgb_to_yuv(pixel_rgb(1, 0, 0));
  EXPECT_NEAR(red.y.at(0, 0), 0.299, 1e-15);
  EXPECT_NEAR(red.u.at(0, 0), 0.5 * (0.0 - 0.299) / 0.886, 1e-15);
  EXPECT_NEAR(red.u.at(0, 0), -0.1687, 1e-4);
  EXPECT_NEAR(red.v.at(0, 0), 0.5, 1e-15);
}

TEST(Yuv, InverseRoundTrip) {
  const ImageBuffer x = synth::noise_image(17, 23, 3, 5, -0.3, 1.3);
  EXPECT_LE(synth::max_abs_diff(yuv_to_rgb(rgb_to_yuv(x)), x), 1e-12);

  YuvImage w{ImageBuffer(1, 1, 1, 1.0), ImageBuffer(1, 1, 1), ImageBuffer(1, 1, 1)};
  const ImageBuffer white = yuv_to_rgb(w);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(white.at(0, 0, c), 1.0, 1e-15);

  YuvImage r{ImageBuffer(1, 1, 1, 0.299), ImageBuffer(1, 1, 1, -0.1687),
             ImageBuffer(1, 1, 1, 0.5)};
  const ImageBuffer red = yuv_to_rgb(r);
  EXPECT_NEAR(red.at(0, 0, 0), 1.0, 1e-4);
  EXPECT_NEAR(red.at(0, 0, 1), 0.0, 1e-4);
  EXPECT_NEAR(red.at(0, 0, 2), 0.0, 1e-4);
}

TEST(Grayscale, Weights) {
  EXPECT_NEAR(to_grayscale(ImageBuffer(3, 3, 3, 0.5)).at(2, 2), 0.5, 1e-15);
  EXPECT_NEAR(to_grayscale(pixel_rgb(1, 0, 0)).at(0, 0), 0.299, 1e-15);
  const ImageBuffer mono = synth::noise_image(5, 6, 1, 3);
  EXPECT_EQ(to_grayscale(mono), mono);
}

TEST(Laplacian, ConstantAndRamp) {
  const ImageBuffer lap = laplacian(ImageBuffer(6, 7, 1, 0.37));
  for (double v : lap.samples()) EXPECT_EQ(v, 0.0);

  const int w = 10;
  ImageBuffer ramp(8, w, 1);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < w; ++c) ramp.at(r, c) = static_cast<double>(c) / w;
  const ImageBuffer lr = laplacian(ramp);
  for (int r = 0; r < 8; ++r)
    for (int c = 1; c < w - 1; ++c) EXPECT_NEAR(lr.at(r, c), 0.0, 1e-15);
  // Reflect-101 at x = 0 sees neighbours 1/W on both sides.
  EXPECT_NEAR(lr.at(3, 0), 2.0 / w, 1e-15);
}

TEST(Laplacian, Impulse) {
  ImageBuffer img(5, 5, 1);
  img.at(2, 2) = 1.0;
  const ImageBuffer lap = laplacian(img);
  EXPECT_EQ(lap.at(2, 2), -4.0);
  EXPECT_EQ(lap.at(1, 2), 1.0);
  EXPECT_EQ(lap.at(3, 2), 1.0);
  EXPECT_EQ(lap.at(2, 1), 1.0);
  EXPECT_EQ(lap.at(2, 3), 1.0);
  EXPECT_EQ(lap.at(1, 1), 0.0);
  EXPECT_EQ(lap.at(0, 0), 0.0);
}

TEST(Clamp, Values) {
  const ImageBuffer c = clamp01(ImageBuffer(1, 1, 3, {1.3, -0.2, 0.5}));
  EXPECT_EQ(c.at(0, 0, 0), 1.0);
  EXPECT_EQ(c.at(0, 0, 1), 0.0);
  EXPECT_EQ(c.at(0, 0, 2), 0.5);
  EXPECT_EQ(count_out_of_range(ImageBuffer(1, 1, 3, {1.3, -0.2, 0.5})), 2u);
}

TEST(ImageIo, PngRoundTripIsQuantisation) {
  const auto dir = std::filesystem::temp_directory_path() / "gea_test_io";
  std::filesystem::remove_all(dir);
  const ImageBuffer img = synth::noise_image(9, 13, 3, 11, -0.1, 1.1);
  save_png(dir / "x.png", img);
  const ImageBuffer back = load_rgb(dir / "x.png");
  EXPECT_EQ(back, quantize8(img));
  // Half-up rounding of the clamped sample.
  const ImageBuffer q = quantize8(ImageBuffer(1, 1, 1, {0.5 / 255.0 + 1e-12}));
  EXPECT_EQ(q.at(0, 0), 1.0 / 255.0);

  save_png(dir / "g.png", ImageBuffer(3, 3, 1, 0.2));
  const ImageBuffer grey = load_rgb(dir / "g.png");
  EXPECT_EQ(grey.channels(), 3);
  EXPECT_EQ(grey.at(1, 1, 2), 51.0 / 255.0);

  EXPECT_THROW(load_rgb(dir / "missing.png"), DataError);
  {
    std::FILE* f = std::fopen((dir / "junk.png").c_str(), "wb");
    std::fputs("not an image", f);
    std::fclose(f);
  }
  EXPECT_THROW(load_rgb(dir / "junk.png"), DataError);
  std::filesystem::remove_all(dir);
}
