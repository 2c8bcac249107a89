#pragma once

#include "gea/image.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace gea {

// Per-pixel mean residual energies between an image and its reference:
//   e_lum  mean (Y_img - Y_gt)^2
//   e_chr  mean (U_img - U_gt)^2 + mean (V_img - V_gt)^2
//   e_tex  mean (Lap(gray_img) - Lap(gray_gt))^2, samples in [0,1]
// The fractions are shares of e_lum + e_chr + e_tex; they describe a relative
// split of heterogeneous quantities, not a physical energy budget.
struct EnergyReport {
  double e_lum = 0.0;
  double e_chr = 0.0;
  double e_tex = 0.0;
  double f_lum = 0.0;
  double f_chr = 0.0;
  double f_tex = 0.0;
  std::size_t n_pixels = 0;

  double total() const noexcept { return e_lum + e_chr + e_tex; }
};

EnergyReport decompose_energy(const ImageBuffer& img, const ImageBuffer& gt);

// Fills f_* from e_*; all zero when the total is zero.
void update_fractions(EnergyReport& report);

enum class ResidualChannel { Y, U, V, R, G, B, Gray };

std::string_view channel_name(ResidualChannel ch);
std::optional<ResidualChannel> parse_channel(std::string_view name);

struct ResidualHistogram {
  std::vector<double> bin_edges;       // bins + 1, strictly increasing
  std::vector<std::uint64_t> counts;   // bins
  double mean = 0.0;                   // over raw (unclipped) residuals
  double std = 0.0;                    // population standard deviation
  ResidualChannel channel = ResidualChannel::Y;
  // Raw moments kept so histograms from several images merge exactly.
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t n = 0;
};

inline constexpr int kDefaultHistogramBins = 201;
inline constexpr std::pair<double, double> kDefaultHistogramRange{-1.0, 1.0};

// Histogram of img - gt on the selected channel. Residuals outside [lo, hi)
// land in the first/last bin; mean and std use the raw residuals.
ResidualHistogram residual_histogram(const ImageBuffer& img, const ImageBuffer& gt,
                                     ResidualChannel channel, int bins = kDefaultHistogramBins,
                                     std::pair<double, double> range = kDefaultHistogramRange);

// Adds `other` into `into`; edges and channel must match.
void merge_histogram(ResidualHistogram& into, const ResidualHistogram& other);

// e_lum(low, gt) / e_lum(aligned, gt). Energies below 1e-24 count as zero;
// +infinity when only the denominator is zero, 1 when both are.
double luminance_error_ratio(const ImageBuffer& low, const ImageBuffer& aligned,
                             const ImageBuffer& gt);

}  // namespace gea
