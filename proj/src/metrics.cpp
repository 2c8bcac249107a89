#include "gea/metrics.hpp"

#include "gea/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace gea {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 1.0) * (0.01 * 1.0);
constexpr double kC2 = (0.03 * 1.0) * (0.03 * 1.0);

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    taps[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * kSigma * kSigma));
    total += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= total;
  return taps;
}

// Separable 'valid' Gaussian filter of a plane given as a flat row-major
// vector; output is (h-10) x (w-10).
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::array<double, kWindow>& taps) {
  const int oh = h - kWindow + 1, ow = w - kWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * static_cast<std::size_t>(ow));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k)
        acc += taps[static_cast<std::size_t>(k)] *
               src[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                   static_cast<std::size_t>(c + k)];
      tmp[static_cast<std::size_t>(r) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(c)] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * static_cast<std::size_t>(ow));
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k)
        acc += taps[static_cast<std::size_t>(k)] *
               tmp[static_cast<std::size_t>(r + k) * static_cast<std::size_t>(ow) +
                   static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(r) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(c)] = acc;
    }
  return out;
}

double ssim_plane(const std::vector<double>& x, const std::vector<double>& y, int h, int w) {
  static const auto taps = gaussian_taps();
  const std::size_t n = x.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, h, w, taps);
  const auto mu_y = filter_valid(y, h, w, taps);
  const auto e_xx = filter_valid(xx, h, w, taps);
  const auto e_yy = filter_valid(yy, h, w, taps);
  const auto e_xy = filter_valid(xy, h, w, taps);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    // Written so that x == y yields exactly 1 per window.
    const double num = (2.0 * mx * my + kC1) * (2.0 * cov + kC2);
    const double den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
    total += num / den;
  }
  return total / static_cast<double>(mu_x.size());
}

void require_pair(const ImageBuffer& a, const ImageBuffer& b, const char* op) {
  require(!a.empty() && a.same_shape(b), std::string(op) + ": image shapes differ");
}

}  // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_pair(a, b, "psnr");
  const ImageBuffer ca = clamp01(a), cb = clamp01(b);
  auto x = ca.samples();
  auto y = cb.samples();
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    total += d * d;
  }
  const double mse = total / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_pair(a, b, "ssim");
  require(a.height() >= kWindow && a.width() >= kWindow,
          "ssim requires images of at least 11x11 pixels");
  const ImageBuffer ca = clamp01(a), cb = clamp01(b);
  double total = 0.0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    const ImageBuffer pa = ca.channel(ch), pb = cb.channel(ch);
    const std::vector<double> x(pa.samples().begin(), pa.samples().end());
    const std::vector<double> y(pb.samples().begin(), pb.samples().end());
    total += ssim_plane(x, y, a.height(), a.width());
  }
  return total / a.channels();
}

PairScore pair_score(const ImageBuffer& pred, const ImageBuffer& gt) {
  require(pred.channels() == 3 && gt.channels() == 3, "pair_score requires 3-channel images");
  require_pair(pred, gt, "pair_score");
  PairScore s;
  s.psnr_db = psnr(pred, gt);
  s.ssim = ssim(pred, gt);

  auto p = pred.samples();
  auto g = gt.samples();
  double rec = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) rec += std::abs(p[i] - g[i]);
  s.l_rec = rec / static_cast<double>(p.size());

  const YuvImage a = rgb_to_yuv(pred), b = rgb_to_yuv(gt);
  double du = 0.0, dv = 0.0;
  auto au = a.u.samples(), bu = b.u.samples(), av = a.v.samples(), bv = b.v.samples();
  for (std::size_t i = 0; i < au.size(); ++i) {
    du += std::abs(au[i] - bu[i]);
    dv += std::abs(av[i] - bv[i]);
  }
  const double n = static_cast<double>(au.size());
  s.l_color = du / n + dv / n;
  return s;
}

}  // namespace gea
