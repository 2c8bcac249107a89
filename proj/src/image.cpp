#include "gea/image.hpp"

#include "gea/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gea {

namespace {

constexpr double kUScale = 0.5 / (1.0 - kLumaB);
constexpr double kVScale = 0.5 / (1.0 - kLumaR);

void check_dims(int height, int width, int channels) {
  require(height >= 1 && width >= 1, "image dimensions must be positive");
  require(channels == 1 || channels == 3,
          "image must have 1 or 3 channels, got " + std::to_string(channels));
}

// Reflect-101 index: -1 -> 1, n -> n-2.
int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace

ImageBuffer::ImageBuffer(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width, channels);
  require(std::isfinite(fill), "fill value must be finite");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

ImageBuffer::ImageBuffer(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_dims(height, width, channels);
  require(data_.size() == pixel_count() * static_cast<std::size_t>(channels),
          "sample count does not match height*width*channels");
  require(std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); }),
          "image samples must be finite");
}

ImageBuffer ImageBuffer::channel(int ch) const {
  require(ch >= 0 && ch < channels_, "channel index out of range");
  ImageBuffer out(height_, width_, 1);
  auto dst = out.samples();
  for (std::size_t p = 0; p < pixel_count(); ++p)
    dst[p] = data_[p * static_cast<std::size_t>(channels_) + static_cast<std::size_t>(ch)];
  return out;
}

ImageBuffer ImageBuffer::crop(int row0, int col0, int rows, int cols) const {
  require(row0 >= 0 && col0 >= 0 && rows >= 1 && cols >= 1 && row0 + rows <= height_ &&
              col0 + cols <= width_,
          "crop rectangle outside image");
  ImageBuffer out(rows, cols, channels_);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int k = 0; k < channels_; ++k) out.at(r, c, k) = at(row0 + r, col0 + c, k);
  return out;
}

YuvImage rgb_to_yuv(const ImageBuffer& rgb) {
  require(rgb.channels() == 3, "rgb_to_yuv requires a 3-channel image");
  const int h = rgb.height(), w = rgb.width();
  YuvImage out{ImageBuffer(h, w, 1), ImageBuffer(h, w, 1), ImageBuffer(h, w, 1)};
  auto src = rgb.samples();
  auto y = out.y.samples(), u = out.u.samples(), v = out.v.samples();
  for (std::size_t p = 0; p < rgb.pixel_count(); ++p) {
    const double r = src[3 * p], g = src[3 * p + 1], b = src[3 * p + 2];
    const double luma = kLumaR * r + kLumaG * g + kLumaB * b;
    y[p] = luma;
    u[p] = kUScale * (b - luma);
    v[p] = kVScale * (r - luma);
  }
  return out;
}

ImageBuffer yuv_to_rgb(const YuvImage& yuv) {
  require(yuv.y.channels() == 1 && yuv.u.channels() == 1 && yuv.v.channels() == 1,
          "YUV planes must be single-channel");
  require(yuv.y.same_size(yuv.u) && yuv.y.same_size(yuv.v), "YUV plane sizes differ");
  ImageBuffer out(yuv.y.height(), yuv.y.width(), 3);
  auto dst = out.samples();
  auto y = yuv.y.samples(), u = yuv.u.samples(), v = yuv.v.samples();
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    const double b = y[p] + u[p] / kUScale;
    const double r = y[p] + v[p] / kVScale;
    const double g = (y[p] - kLumaR * r - kLumaB * b) / kLumaG;
    dst[3 * p] = r;
    dst[3 * p + 1] = g;
    dst[3 * p + 2] = b;
  }
  return out;
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  require(img.channels() == 3, "to_grayscale requires 1 or 3 channels");
  ImageBuffer out(img.height(), img.width(), 1);
  auto src = img.samples();
  auto dst = out.samples();
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    dst[p] = kLumaR * src[3 * p] + kLumaG * src[3 * p + 1] + kLumaB * src[3 * p + 2];
  return out;
}

ImageBuffer laplacian(const ImageBuffer& gray) {
  require(gray.channels() == 1, "laplacian requires a single-channel image");
  const int h = gray.height(), w = gray.width();
  ImageBuffer out(h, w, 1);
  for (int r = 0; r < h; ++r) {
    const int up = reflect101(r - 1, h), down = reflect101(r + 1, h);
    for (int c = 0; c < w; ++c) {
      const int left = reflect101(c - 1, w), right = reflect101(c + 1, w);
      out.at(r, c) = gray.at(up, c) + gray.at(down, c) + gray.at(r, left) +
                     gray.at(r, right) - 4.0 * gray.at(r, c);
    }
  }
  return out;
}

ImageBuffer clamp01(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (double& v : out.samples()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::size_t count_out_of_range(const ImageBuffer& img) {
  auto s = img.samples();
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](double v) { return v < 0.0 || v > 1.0; }));
}

double mean(const ImageBuffer& img) {
  require(!img.empty(), "mean of empty image");
  double total = 0.0;
  for (double v : img.samples()) total += v;
  return total / static_cast<double>(img.sample_count());
}

}  // namespace gea
