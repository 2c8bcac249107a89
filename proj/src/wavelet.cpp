#include "gea/wavelet.hpp"

#include "gea/error.hpp"
#include "gea/image_io.hpp"

#include <algorithm>
#include <cmath>

namespace gea {

WaveletBands dwt_haar(const ImageBuffer& y) {
  require(y.channels() == 1, "dwt_haar requires a single-channel image");
  const int h = y.height(), w = y.width();
  const int bh = (h + 1) / 2, bw = (w + 1) / 2;
  WaveletBands out{ImageBuffer(bh, bw, 1), ImageBuffer(bh, bw, 1), ImageBuffer(bh, bw, 1),
                   ImageBuffer(bh, bw, 1), h, w};
  for (int r = 0; r < bh; ++r) {
    const int r0 = 2 * r, r1 = std::min(2 * r + 1, h - 1);
    for (int c = 0; c < bw; ++c) {
      const int c0 = 2 * c, c1 = std::min(2 * c + 1, w - 1);
      const double a = y.at(r0, c0), b = y.at(r0, c1);
      const double cc = y.at(r1, c0), d = y.at(r1, c1);
      out.ll.at(r, c) = 0.5 * ((a + b) + (cc + d));
      out.lh.at(r, c) = 0.5 * ((a - b) + (cc - d));
      out.hl.at(r, c) = 0.5 * ((a + b) - (cc + d));
      out.hh.at(r, c) = 0.5 * ((a - b) - (cc - d));
    }
  }
  return out;
}

ImageBuffer idwt_haar(const WaveletBands& bands) {
  const ImageBuffer& ll = bands.ll;
  require(ll.channels() == 1 && bands.lh.channels() == 1 && bands.hl.channels() == 1 &&
              bands.hh.channels() == 1,
          "wavelet bands must be single-channel");
  require(ll.same_size(bands.lh) && ll.same_size(bands.hl) && ll.same_size(bands.hh),
          "wavelet band sizes differ");
  const int h = bands.original_height, w = bands.original_width;
  require(h >= 1 && w >= 1 && (h + 1) / 2 == ll.height() && (w + 1) / 2 == ll.width(),
          "wavelet band size inconsistent with recorded original size");

  ImageBuffer out(h, w, 1);
  for (int r = 0; r < ll.height(); ++r) {
    for (int c = 0; c < ll.width(); ++c) {
      const double s = ll.at(r, c), x = bands.lh.at(r, c);
      const double v = bands.hl.at(r, c), d = bands.hh.at(r, c);
      const int r0 = 2 * r, c0 = 2 * c;
      out.at(r0, c0) = 0.5 * ((s + x) + (v + d));
      if (c0 + 1 < w) out.at(r0, c0 + 1) = 0.5 * ((s - x) + (v - d));
      if (r0 + 1 < h) {
        out.at(r0 + 1, c0) = 0.5 * ((s + x) - (v + d));
        if (c0 + 1 < w) out.at(r0 + 1, c0 + 1) = 0.5 * ((s - x) - (v - d));
      }
    }
  }
  return out;
}

ImageBuffer clu_apply(const ImageBuffer& ll, const ImageBuffer& residual, double gamma_l) {
  require(ll.channels() == 1 && residual.channels() == 1, "clu_apply requires single-channel planes");
  require(ll.same_size(residual), "clu_apply: ll and residual dimensions differ");
  require(std::isfinite(gamma_l) && gamma_l >= 0.0, "gamma_l must be finite and >= 0");
  ImageBuffer out = ll;
  if (gamma_l == 0.0) return out;
  auto base = ll.samples();
  auto res = residual.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    double v = base[i] + gamma_l * std::tanh(res[i]);
    // Rounding of the sum can overshoot by an ulp; step back inside the bound.
    while (std::abs(v - base[i]) > gamma_l) v = std::nextafter(v, base[i]);
    dst[i] = v;
  }
  return out;
}

namespace {

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total;
}

}  // namespace

double lum_preservation_loss(const ImageBuffer& out_ll, const ImageBuffer& in_ll) {
  require(out_ll.same_shape(in_ll), "lum_preservation_loss: dimensions differ");
  const auto a = out_ll.samples(), b = in_ll.samples();
  double peak = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) peak = std::max(peak, std::abs(a[i] - b[i]));
  // Rounded summation can land a few ulps above the largest term.
  return std::min(sum_abs_diff(a, b) / static_cast<double>(a.size()), peak);
}

double hf_freq_loss(const ImageBuffer& y_hat, const ImageBuffer& y_gt) {
  require(y_hat.channels() == 1 && y_gt.channels() == 1, "hf_freq_loss requires single-channel planes");
  require(y_hat.same_size(y_gt), "hf_freq_loss: dimensions differ");
  const WaveletBands p = dwt_haar(y_hat);
  const WaveletBands g = dwt_haar(y_gt);
  const double total = sum_abs_diff(p.lh.samples(), g.lh.samples()) +
                       sum_abs_diff(p.hl.samples(), g.hl.samples()) +
                       sum_abs_diff(p.hh.samples(), g.hh.samples());
  return total / (3.0 * static_cast<double>(p.lh.sample_count()));
}

void export_bands(const WaveletBands& bands, const std::filesystem::path& dir) {
  auto encode = [](const ImageBuffer& band, double offset) {
    ImageBuffer img = band;
    for (double& v : img.samples()) v = offset + 0.5 * v;
    return img;
  };
  save_png(dir / "ll.png", encode(bands.ll, 0.0));
  save_png(dir / "lh.png", encode(bands.lh, 0.5));
  save_png(dir / "hl.png", encode(bands.hl, 0.5));
  save_png(dir / "hh.png", encode(bands.hh, 0.5));
}

}  // namespace gea
