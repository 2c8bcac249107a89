#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gea {

// H x W x C raster of doubles, row-major with interleaved channels.
// Nominal range is [0,1] but nothing here clamps: out-of-gamut values are
// meaningful to the fitting and energy code. Only clamp01() clips.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int height, int width, int channels, double fill = 0.0);
  // Takes ownership of `data`; throws InvalidInput on size mismatch or
  // non-finite samples.
  ImageBuffer(int height, int width, int channels, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  std::size_t sample_count() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int row, int col, int ch = 0) noexcept {
    return data_[index(row, col, ch)];
  }
  double at(int row, int col, int ch = 0) const noexcept {
    return data_[index(row, col, ch)];
  }

  std::span<double> samples() noexcept { return data_; }
  std::span<const double> samples() const noexcept { return data_; }
  std::span<const double> pixel(int row, int col) const noexcept {
    return {data_.data() + index(row, col, 0), static_cast<std::size_t>(channels_)};
  }

  bool same_shape(const ImageBuffer& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }
  bool same_size(const ImageBuffer& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  // Single-channel copy of channel `ch`.
  ImageBuffer channel(int ch) const;
  // Rectangular sub-image copy.
  ImageBuffer crop(int row0, int col0, int rows, int cols) const;

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int row, int col, int ch) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(ch);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

struct YuvImage {
  ImageBuffer y;
  ImageBuffer u;
  ImageBuffer v;
};

// BT.601 full-range analysis matrix; U and V are centred on zero.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

YuvImage rgb_to_yuv(const ImageBuffer& rgb);
ImageBuffer yuv_to_rgb(const YuvImage& yuv);

// BT.601 luma for 3-channel input; 1-channel input is returned as is.
ImageBuffer to_grayscale(const ImageBuffer& img);

// 4-neighbour Laplacian [[0,1,0],[1,-4,1],[0,1,0]] with reflect-101 borders.
ImageBuffer laplacian(const ImageBuffer& gray);

ImageBuffer clamp01(const ImageBuffer& img);

// Number of samples outside [0,1].
std::size_t count_out_of_range(const ImageBuffer& img);

double mean(const ImageBuffer& img);

}  // namespace gea
