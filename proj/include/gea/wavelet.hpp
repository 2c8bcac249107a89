#pragma once

#include "gea/image.hpp"

#include <filesystem>

namespace gea {

// Single-level orthonormal Haar decomposition of a single-channel plane.
// For a 2x2 block [[a,b],[c,d]]:
//   ll = (a+b+c+d)/2   lh = (a-b+c-d)/2   hl = (a+b-c-d)/2   hh = (a-b-c+d)/2
// Odd dimensions are padded to even by repeating the last row/column
// (half-sample symmetric extension); original_* records the unpadded size.
struct WaveletBands {
  ImageBuffer ll;
  ImageBuffer lh;
  ImageBuffer hl;
  ImageBuffer hh;
  int original_height = 0;
  int original_width = 0;
};

inline constexpr double kDefaultGammaL = 0.1;

WaveletBands dwt_haar(const ImageBuffer& y);
ImageBuffer idwt_haar(const WaveletBands& bands);

// Constrained luminance update: ll + gamma_l * tanh(residual). The result
// never moves a sample by more than gamma_l, including after rounding.
ImageBuffer clu_apply(const ImageBuffer& ll, const ImageBuffer& residual, double gamma_l);

// Mean absolute difference between two LL planes.
double lum_preservation_loss(const ImageBuffer& out_ll, const ImageBuffer& in_ll);

// Mean absolute difference over the concatenated LH, HL, HH bands of the two
// planes' Haar decompositions.
double hf_freq_loss(const ImageBuffer& y_hat, const ImageBuffer& y_gt);

// Writes ll.png, lh.png, hl.png, hh.png into `dir` for inspection only (8-bit,
// lossy). LL is stored as value/2, the signed bands as 0.5 + value/2.
void export_bands(const WaveletBands& bands, const std::filesystem::path& dir);

}  // namespace gea
