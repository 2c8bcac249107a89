#include "gea/anchor.hpp"
#include "gea/energy.hpp"
#include "gea/error.hpp"

#include "synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace gea;

namespace {

ImageBuffer plus(const ImageBuffer& img, double d) {
  ImageBuffer out = img;
  for (double& v : out.samples()) v += d;
  return out;
}

ImageBuffer times(const ImageBuffer& img, double g) {
  ImageBuffer out = img;
  for (double& v : out.samples()) v *= g;
  return out;
}

}  // namespace

TEST(Energy, IdenticalIsZero) {
  const ImageBuffer gt = synth::noise_image(12, 10, 3, 1);
  const EnergyReport e = decompose_energy(gt, gt);
  EXPECT_EQ(e.e_lum, 0.0);
  EXPECT_EQ(e.e_chr, 0.0);
  EXPECT_EQ(e.e_tex, 0.0);
  EXPECT_EQ(e.f_lum, 0.0);
  EXPECT_EQ(e.f_chr, 0.0);
  EXPECT_EQ(e.f_tex, 0.0);
  EXPECT_EQ(e.n_pixels, 120u);
}

TEST(Energy, UniformShiftIsPureLuminance) {
  const ImageBuffer gt = synth::noise_image(12, 10, 3, 2);
  const EnergyReport e = decompose_energy(plus(gt, 0.1), gt);
  EXPECT_NEAR(e.e_lum, 0.01, 1e-15);
  EXPECT_NEAR(e.e_chr, 0.0, 1e-28);
  EXPECT_NEAR(e.e_tex, 0.0, 1e-26);
  EXPECT_NEAR(e.f_lum, 1.0, 1e-12);
}

TEST(Energy, ComponentsMatchDirectComputation) {
  const ImageBuffer gt = synth::noise_image(9, 11, 3, 3);
  const ImageBuffer img = synth::noise_image(9, 11, 3, 4);
  const EnergyReport e = decompose_energy(img, gt);
  // Oracle: explicit BT.601 rows and a hand 4-neighbour stencil.
  auto yuv = [](const ImageBuffer& x, int r, int c) {
    const double R = x.at(r, c, 0), G = x.at(r, c, 1), B = x.at(r, c, 2);
    const double Y = 0.299 * R + 0.587 * G + 0.114 * B;
    return std::array<double, 3>{Y, 0.5 * (B - Y) / 0.886, 0.5 * (R - Y) / 0.701};
  };
  auto refl = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
  auto lap = [&](const ImageBuffer& x, int r, int c) {
    auto g = [&](int rr, int cc) { return yuv(x, refl(rr, 9), refl(cc, 11))[0]; };
    return g(r - 1, c) + g(r + 1, c) + g(r, c - 1) + g(r, c + 1) - 4 * g(r, c);
  };
  double el = 0, ec = 0, et = 0;
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 11; ++c) {
      const auto a = yuv(img, r, c), b = yuv(gt, r, c);
      el += (a[0] - b[0]) * (a[0] - b[0]);
      ec += (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]);
      const double d = lap(img, r, c) - lap(gt, r, c);
      et += d * d;
    }
  EXPECT_NEAR(e.e_lum, el / 99, 1e-14);
  EXPECT_NEAR(e.e_chr, ec / 99, 1e-14);
  EXPECT_NEAR(e.e_tex, et / 99, 1e-13);
  EXPECT_NEAR(e.f_lum + e.f_chr + e.f_tex, 1.0, 1e-15);
}

TEST(Energy, AnchoringRemovesLuminanceShare) {
  const ImageBuffer low = synth::textured_low(64, 64, 5);
  const ImageBuffer gt = times(low, 4.0);
  const EnergyReport pre = decompose_energy(low, gt);
  const ImageBuffer aligned = apply_anchor(fit_anchor(low, gt, Family::Affine12), low);
  const EnergyReport post = decompose_energy(aligned, gt);
  EXPECT_GT(pre.f_lum, 0.5);
  EXPECT_LT(post.e_lum, 1e-20);
  EXPECT_GT(luminance_error_ratio(low, aligned, gt), 1e6);
}

TEST(Energy, NoiseResidualIsTexture) {
  const ImageBuffer low = synth::textured_low(64, 64, 6);
  ImageBuffer gt = times(low, 3.0);
  synth::add_gaussian(gt, 0.02, 7);
  const ImageBuffer aligned = apply_anchor(fit_anchor(low, gt, Family::Affine12), low);
  const EnergyReport post = decompose_energy(aligned, gt);
  EXPECT_GT(post.f_tex, 0.5);
  EXPECT_GT(post.f_tex, post.f_lum);
  EXPECT_GT(post.f_tex, post.f_chr);
}

TEST(Energy, Fractions) {
  EnergyReport r;
  r.e_lum = 3;
  r.e_chr = 1;
  update_fractions(r);
  EXPECT_EQ(r.f_lum, 0.75);
  EXPECT_EQ(r.f_chr, 0.25);
  EXPECT_EQ(r.f_tex, 0.0);
  EXPECT_THROW(decompose_energy(ImageBuffer(2, 2, 1), ImageBuffer(2, 2, 1)), InvalidInput);
}

TEST(Histogram, MassAndMoments) {
  const ImageBuffer gt = synth::noise_image(10, 10, 3, 8);
  const ResidualHistogram h0 = residual_histogram(gt, gt, ResidualChannel::Y);
  ASSERT_EQ(h0.counts.size(), 201u);
  ASSERT_EQ(h0.bin_edges.size(), 202u);
  EXPECT_EQ(h0.counts[100], 100u);
  EXPECT_EQ(h0.mean, 0.0);
  EXPECT_EQ(h0.std, 0.0);

  const ResidualHistogram h1 = residual_histogram(plus(gt, 0.1), gt, ResidualChannel::Y);
  std::size_t bin = 0;
  for (std::size_t i = 0; i < h1.counts.size(); ++i)
    if (h1.counts[i] > 0) bin = i;
  EXPECT_EQ(h1.counts[bin], 100u);
  EXPECT_LE(h1.bin_edges[bin], 0.1);
  EXPECT_GT(h1.bin_edges[bin + 1], 0.1);
  EXPECT_NEAR(h1.mean, 0.1, 1e-12);
}

TEST(Histogram, ClipsIntoEndBinsButKeepsRawMoments) {
  const ImageBuffer gt(4, 4, 3, 0.0);
  const ResidualHistogram h =
      residual_histogram(plus(gt, 3.0), gt, ResidualChannel::R, 10, {-1.0, 1.0});
  EXPECT_EQ(h.counts.back(), 16u);
  EXPECT_NEAR(h.mean, 3.0, 1e-15);
  const ResidualHistogram lo =
      residual_histogram(plus(gt, -3.0), gt, ResidualChannel::G, 10, {-1.0, 1.0});
  EXPECT_EQ(lo.counts.front(), 16u);
  EXPECT_THROW(residual_histogram(gt, gt, ResidualChannel::Y, 0), InvalidInput);
  EXPECT_THROW(residual_histogram(gt, gt, ResidualChannel::Y, 5, {1.0, -1.0}), InvalidInput);
}

TEST(Histogram, AnchoringNarrowsResidual) {
  const ImageBuffer low = synth::textured_low(48, 48, 9);
  ImageBuffer gt = plus(times(low, 2.5), 0.04);
  synth::add_gaussian(gt, 0.01, 10);
  const ImageBuffer aligned = apply_anchor(fit_anchor(low, gt, Family::Affine12), low);
  const auto raw = residual_histogram(low, gt, ResidualChannel::Y);
  const auto post = residual_histogram(aligned, gt, ResidualChannel::Y);
  EXPECT_LT(post.std, raw.std);
}

TEST(Histogram, MergeEqualsJointHistogram) {
  const ImageBuffer a = synth::noise_image(6, 6, 3, 11), b = synth::noise_image(6, 6, 3, 12);
  const ImageBuffer c = synth::noise_image(6, 6, 3, 13), d = synth::noise_image(6, 6, 3, 14);
  ResidualHistogram m;
  merge_histogram(m, residual_histogram(a, b, ResidualChannel::U));
  merge_histogram(m, residual_histogram(c, d, ResidualChannel::U));
  const auto h1 = residual_histogram(a, b, ResidualChannel::U);
  const auto h2 = residual_histogram(c, d, ResidualChannel::U);
  EXPECT_EQ(m.n, 72u);
  for (std::size_t i = 0; i < m.counts.size(); ++i) EXPECT_EQ(m.counts[i], h1.counts[i] + h2.counts[i]);
  EXPECT_NEAR(m.mean, (h1.mean + h2.mean) / 2, 1e-15);
  ResidualHistogram other = residual_histogram(a, b, ResidualChannel::V);
  EXPECT_THROW(merge_histogram(m, other), InvalidInput);
}

TEST(LuminanceRatio, Markers) {
  const ImageBuffer gt = synth::noise_image(5, 5, 3, 15);
  const ImageBuffer low = times(gt, 0.5);
  EXPECT_EQ(luminance_error_ratio(low, low, gt), 1.0);
  EXPECT_EQ(luminance_error_ratio(low, gt, gt), std::numeric_limits<double>::infinity());
  EXPECT_EQ(luminance_error_ratio(gt, gt, gt), 1.0);
}

TEST(ChannelNames, RoundTrip) {
  for (auto ch : {ResidualChannel::Y, ResidualChannel::U, ResidualChannel::V, ResidualChannel::R,
                  ResidualChannel::G, ResidualChannel::B, ResidualChannel::Gray})
    EXPECT_EQ(parse_channel(channel_name(ch)), ch);
  EXPECT_FALSE(parse_channel("alpha"));
}
