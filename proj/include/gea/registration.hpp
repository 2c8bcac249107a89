#pragma once

#include "gea/image.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string_view>

namespace gea {

// 2x3 affine map taking input-image coordinates (x = column, y = row) to
// reference coordinates.
struct GeoWarp {
  Eigen::Matrix<double, 2, 3> p = Eigen::Matrix<double, 2, 3>::Identity();

  static GeoWarp identity() { return {}; }
  static GeoWarp translation(double tx, double ty);
  // Rotation by `degrees` about (cx, cy) followed by a translation.
  static GeoWarp rotation(double degrees, double cx, double cy, double tx = 0.0, double ty = 0.0);

  double determinant() const { return p(0, 0) * p(1, 1) - p(0, 1) * p(1, 0); }
  bool is_invertible() const;
  GeoWarp inverse() const;
  Eigen::Vector2d apply(double x, double y) const {
    return {p(0, 0) * x + p(0, 1) * y + p(0, 2), p(1, 0) * x + p(1, 1) * y + p(1, 2)};
  }
};

enum class MotionModel { Translation, Euclidean, Affine };

std::string_view model_name(MotionModel m);
std::optional<MotionModel> parse_model(std::string_view name);

struct WarpedImage {
  ImageBuffer image;
  ImageBuffer mask;  // 1 where every bilinear tap with non-zero weight is in bounds
};

// Resamples `img` onto an out_h x out_w reference grid: out(x) = img(W^-1 x),
// bilinear. Pixels whose source falls outside the image are 0 with mask 0.
WarpedImage warp_image(const ImageBuffer& img, const GeoWarp& w, int out_h, int out_w);

// Zero-mean normalised cross-correlation between the warped grayscale input
// and the grayscale reference over the warped input's valid region.
// Throws DegenerateInput when either side has zero variance there.
double ecc_value(const ImageBuffer& input, const ImageBuffer& reference, const GeoWarp& w);

struct EccOptions {
  MotionModel model = MotionModel::Affine;
  int max_iters = 200;
  double eps = 1e-6;
  double smoothing_sigma = 1.0;
  // Pyramid levels; 0 halves while the coarsest short side stays >= 64 px.
  int pyramid_levels = 0;
};

struct EccResult {
  GeoWarp warp;
  double final_ecc = 0.0;  // ecc_value() of the returned warp
  int iterations = 0;
  bool converged = false;
};

// Forward-additive ECC maximisation of the ZNCC objective. The returned warp
// is the best one seen and never scores below the identity start.
EccResult ecc_register(const ImageBuffer& input, const ImageBuffer& reference,
                       const EccOptions& options = {});

struct CropRect {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;
  bool operator==(const CropRect&) const = default;
};

// Bounding box of the pixels where every mask is 1, tightened until it holds
// no zero-mask pixel, then shrunk by `margin` on each side. Throws EmptyRegion
// when nothing is left.
CropRect shared_valid_crop(std::span<const ImageBuffer> masks, int margin);

struct RegisteredPair {
  ImageBuffer low;
  ImageBuffer gt;
  EccResult ecc;
  CropRect crop;
};

// Registers low onto gt, warps low, and crops both to the shared valid region.
RegisteredPair register_pair(const ImageBuffer& low, const ImageBuffer& gt, int margin = 4,
                             const EccOptions& options = {});

}  // namespace gea
