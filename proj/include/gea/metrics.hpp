#pragma once

#include "gea/image.hpp"

namespace gea {

// Both metrics clamp their inputs to [0,1] first (peak 1.0).

// 10 log10(1 / MSE); +infinity when the clamped images are identical.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// L = 1. Averaged over the valid window positions, then over channels.
// Requires min(H, W) >= 11.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

struct PairScore {
  double psnr_db = 0.0;  // +inf for identical images
  double ssim = 0.0;
  double l_rec = 0.0;    // mean |pred - gt| over RGB samples
  double l_color = 0.0;  // mean |U - U_gt| + mean |V - V_gt|
};

// psnr/ssim on clamped inputs; l_rec and l_color on the raw values.
PairScore pair_score(const ImageBuffer& pred, const ImageBuffer& gt);

}  // namespace gea
