#include "gea/energy.hpp"

#include "gea/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gea {

namespace {

double mean_sq_diff(const ImageBuffer& a, const ImageBuffer& b) {
  auto x = a.samples();
  auto y = b.samples();
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    total += d * d;
  }
  return total / static_cast<double>(x.size());
}

void require_rgb_pair(const ImageBuffer& img, const ImageBuffer& gt, const char* op) {
  require(img.channels() == 3 && gt.channels() == 3,
          std::string(op) + " requires 3-channel images");
  require(img.same_shape(gt), std::string(op) + ": dimensions differ");
}

double luminance_energy(const ImageBuffer& img, const ImageBuffer& gt) {
  return mean_sq_diff(to_grayscale(img), to_grayscale(gt));
}

}  // namespace

void update_fractions(EnergyReport& report) {
  const double total = report.total();
  if (total > 0.0) {
    report.f_lum = report.e_lum / total;
    report.f_chr = report.e_chr / total;
    report.f_tex = report.e_tex / total;
  } else {
    report.f_lum = report.f_chr = report.f_tex = 0.0;
  }
}

EnergyReport decompose_energy(const ImageBuffer& img, const ImageBuffer& gt) {
  require_rgb_pair(img, gt, "decompose_energy");
  const YuvImage a = rgb_to_yuv(img);
  const YuvImage b = rgb_to_yuv(gt);
  EnergyReport r;
  r.n_pixels = img.pixel_count();
  r.e_lum = mean_sq_diff(a.y, b.y);
  r.e_chr = mean_sq_diff(a.u, b.u) + mean_sq_diff(a.v, b.v);
  r.e_tex = mean_sq_diff(laplacian(to_grayscale(img)), laplacian(to_grayscale(gt)));
  update_fractions(r);
  return r;
}

std::string_view channel_name(ResidualChannel ch) {
  switch (ch) {
    case ResidualChannel::Y:
      return "Y";
    case ResidualChannel::U:
      return "U";
    case ResidualChannel::V:
      return "V";
    case ResidualChannel::R:
      return "R";
    case ResidualChannel::G:
      return "G";
    case ResidualChannel::B:
      return "B";
    case ResidualChannel::Gray:
      return "Gray";
  }
  return "?";
}

std::optional<ResidualChannel> parse_channel(std::string_view name) {
  for (auto ch : {ResidualChannel::Y, ResidualChannel::U, ResidualChannel::V, ResidualChannel::R,
                  ResidualChannel::G, ResidualChannel::B, ResidualChannel::Gray})
    if (channel_name(ch) == name) return ch;
  return std::nullopt;
}

namespace {

ImageBuffer select_plane(const ImageBuffer& img, ResidualChannel ch) {
  switch (ch) {
    case ResidualChannel::Y:
    case ResidualChannel::Gray:
      // BT.601 luma and the grayscale conversion share weights.
      return to_grayscale(img);
    case ResidualChannel::U:
      return rgb_to_yuv(img).u;
    case ResidualChannel::V:
      return rgb_to_yuv(img).v;
    case ResidualChannel::R:
      return img.channel(0);
    case ResidualChannel::G:
      return img.channel(1);
    case ResidualChannel::B:
      return img.channel(2);
  }
  return img;
}

}  // namespace

ResidualHistogram residual_histogram(const ImageBuffer& img, const ImageBuffer& gt,
                                     ResidualChannel channel, int bins,
                                     std::pair<double, double> range) {
  require_rgb_pair(img, gt, "residual_histogram");
  const auto [lo, hi] = range;
  require(bins >= 1, "histogram needs at least one bin");
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "histogram range must satisfy lo < hi");

  ResidualHistogram h;
  h.channel = channel;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  const double width = (hi - lo) / bins;
  for (int i = 0; i <= bins; ++i) h.bin_edges[static_cast<std::size_t>(i)] = lo + width * i;
  h.bin_edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);

  const ImageBuffer a = select_plane(img, channel);
  const ImageBuffer b = select_plane(gt, channel);
  auto x = a.samples();
  auto y = b.samples();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    h.sum += d;
    h.sum_sq += d * d;
    const double pos = std::floor((d - lo) / width);
    const long idx = std::clamp(static_cast<long>(std::clamp(pos, -1.0, static_cast<double>(bins))),
                                0L, static_cast<long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  h.n = x.size();
  const double n = static_cast<double>(h.n);
  h.mean = h.sum / n;
  // Two-pass variance for accuracy; the raw moments are kept only for merging.
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - y[i]) - h.mean;
    ss += d * d;
  }
  h.std = std::sqrt(ss / n);
  return h;
}

void merge_histogram(ResidualHistogram& into, const ResidualHistogram& other) {
  if (into.counts.empty()) {
    into = other;
    return;
  }
  require(into.bin_edges == other.bin_edges && into.channel == other.channel,
          "cannot merge histograms with different binning");
  for (std::size_t i = 0; i < into.counts.size(); ++i) into.counts[i] += other.counts[i];
  into.sum += other.sum;
  into.sum_sq += other.sum_sq;
  into.n += other.n;
  const double n = static_cast<double>(into.n);
  into.mean = into.sum / n;
  into.std = std::sqrt(std::max(0.0, into.sum_sq / n - into.mean * into.mean));
}

double luminance_error_ratio(const ImageBuffer& low, const ImageBuffer& aligned,
                             const ImageBuffer& gt) {
  require_rgb_pair(low, gt, "luminance_error_ratio");
  require_rgb_pair(aligned, gt, "luminance_error_ratio");
  // Below this an energy is round-off (an RMS error of 1e-12 on [0,1] data).
  constexpr double kFloor = 1e-24;
  auto floored = [](double e) { return e < kFloor ? 0.0 : e; };
  const double num = floored(luminance_energy(low, gt));
  const double den = floored(luminance_energy(aligned, gt));
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace gea
