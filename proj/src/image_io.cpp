#include "gea/image_io.hpp"

#include "gea/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace gea {

namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

template <typename T>
ImageBuffer from_mat(const cv::Mat& mat, double scale) {
  const int h = mat.rows, w = mat.cols, cn = mat.channels();
  ImageBuffer out(h, w, 3);
  for (int r = 0; r < h; ++r) {
    const T* row = mat.ptr<T>(r);
    for (int c = 0; c < w; ++c) {
      const T* px = row + static_cast<std::ptrdiff_t>(c) * cn;
      if (cn == 1) {
        const double g = static_cast<double>(px[0]) / scale;
        out.at(r, c, 0) = out.at(r, c, 1) = out.at(r, c, 2) = g;
      } else {
        // OpenCV stores BGR(A).
        out.at(r, c, 0) = static_cast<double>(px[2]) / scale;
        out.at(r, c, 1) = static_cast<double>(px[1]) / scale;
        out.at(r, c, 2) = static_cast<double>(px[0]) / scale;
      }
    }
  }
  return out;
}

}  // namespace

ImageBuffer load_rgb(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path))
    throw DataError("image not found: " + path.string());
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError("cannot decode image: " + path.string());
  const int cn = mat.channels();
  if (cn != 1 && cn != 3 && cn != 4)
    throw DataError("unsupported channel count in " + path.string());
  switch (mat.depth()) {
    case CV_8U:
      return from_mat<std::uint8_t>(mat, 255.0);
    case CV_16U:
      return from_mat<std::uint16_t>(mat, 65535.0);
    default:
      throw DataError("unsupported sample depth in " + path.string());
  }
}

ImageBuffer quantize8(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (double& v : out.samples()) v = static_cast<double>(to_u8(v)) / 255.0;
  return out;
}

void save_png(const std::filesystem::path& path, const ImageBuffer& img) {
  require(!img.empty(), "cannot save an empty image");
  const int h = img.height(), w = img.width(), cn = img.channels();
  cv::Mat mat(h, w, cn == 1 ? CV_8UC1 : CV_8UC3);
  for (int r = 0; r < h; ++r) {
    auto* row = mat.ptr<std::uint8_t>(r);
    for (int c = 0; c < w; ++c) {
      if (cn == 1) {
        row[c] = to_u8(img.at(r, c));
      } else {
        row[3 * c + 0] = to_u8(img.at(r, c, 2));
        row[3 * c + 1] = to_u8(img.at(r, c, 1));
        row[3 * c + 2] = to_u8(img.at(r, c, 0));
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    throw DataError("cannot encode " + path.string() + ": " + e.what());
  }
  if (!ok) throw DataError("cannot write " + path.string());
}

}  // namespace gea
