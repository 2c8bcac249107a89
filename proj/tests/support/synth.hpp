#pragma once

// Seeded synthetic images for tests. Textures are sums of random sinusoids,
// so warped copies can be sampled analytically instead of by interpolation.

#include "gea/anchor.hpp"
#include "gea/image.hpp"
#include "gea/registration.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace synth {

struct Wave {
  double fx, fy, phase, amp;
};

class Texture {
 public:
  // `max_freq` is in cycles per pixel.
  Texture(std::uint64_t seed, int channels = 3, int waves = 12, double max_freq = 0.08)
      : channels_(channels) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> freq(-max_freq, max_freq);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> amp(0.5, 1.0);
    std::uniform_real_distribution<double> base(0.25, 0.45);
    for (int c = 0; c < channels; ++c) {
      std::vector<Wave> ws;
      double total = 0.0;
      for (int i = 0; i < waves; ++i) {
        Wave w{freq(rng), freq(rng), phase(rng), amp(rng)};
        total += w.amp;
        ws.push_back(w);
      }
      // Peak deviation 0.2 around the base level.
      for (auto& w : ws) w.amp *= 0.2 / total;
      waves_.push_back(ws);
      base_.push_back(base(rng));
    }
  }

  double value(double x, double y, int c) const {
    double v = base_[static_cast<std::size_t>(c)];
    for (const auto& w : waves_[static_cast<std::size_t>(c)])
      v += w.amp * std::sin(2.0 * M_PI * (w.fx * x + w.fy * y) + w.phase);
    return v;
  }

  gea::ImageBuffer render(int h, int w) const {
    return render_mapped(h, w, gea::GeoWarp::identity());
  }

  // out(x) = texture(m(x)): the pixel at x of the result sits at m(x) in the
  // unwarped texture, so `m` is the input->reference map ECC should return.
  gea::ImageBuffer render_mapped(int h, int w, const gea::GeoWarp& m) const {
    gea::ImageBuffer out(h, w, channels_);
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col) {
        const Eigen::Vector2d p = m.apply(col, r);
        for (int c = 0; c < channels_; ++c) out.at(r, col, c) = value(p.x(), p.y(), c);
      }
    return out;
  }

 private:
  int channels_;
  std::vector<std::vector<Wave>> waves_;
  std::vector<double> base_;
};

// Uniform noise image in [lo, hi].
inline gea::ImageBuffer noise_image(int h, int w, int channels, std::uint64_t seed,
                                    double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  gea::ImageBuffer out(h, w, channels);
  for (double& v : out.samples()) v = u(rng);
  return out;
}

// Textured low-light style image: smooth texture plus mild per-pixel noise.
inline gea::ImageBuffer textured_low(int h, int w, std::uint64_t seed) {
  gea::ImageBuffer img = Texture(seed, 3, 10, 0.15).render(h, w);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (double& v : img.samples()) v = 0.4 * v + u(rng);
  return img;
}

// Photo-like image: one shared luminance texture, a mild per-channel tint and
// a weak independent colour texture, so RGB channels are strongly correlated.
inline gea::ImageBuffer natural_image(int h, int w, std::uint64_t seed) {
  const gea::ImageBuffer luma = Texture(seed, 1).render(h, w);
  const gea::ImageBuffer colour = Texture(seed + 0x5bd1e995ULL, 3).render(h, w);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tint(0.9, 1.1);
  const double t[3] = {tint(rng), tint(rng), tint(rng)};
  gea::ImageBuffer out(h, w, 3);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch)
        out.at(r, c, ch) = t[ch] * luma.at(r, c) + 0.25 * (colour.at(r, c, ch) - 0.35);
  return out;
}

// Random well-conditioned affine colour matrix: diagonal gain 1.5..3,
// off-diagonal mixing up to 0.2, bias in [-0.1, 0.1].
inline gea::AnchorMatrix random_affine(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gain(1.5, 3.0), mix(-0.2, 0.2), bias(-0.1, 0.1);
  gea::AnchorMatrix m = gea::AnchorMatrix::identity(gea::Family::Affine12);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m.a(r, c) = r == c ? gain(rng) : mix(rng);
    m.b(r) = bias(rng);
  }
  return m;
}

inline void add_gaussian(gea::ImageBuffer& img, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (double& v : img.samples()) v += n(rng);
}

inline double max_abs_diff(const gea::ImageBuffer& a, const gea::ImageBuffer& b) {
  double m = 0.0;
  auto sa = a.samples();
  auto sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) m = std::max(m, std::abs(sa[i] - sb[i]));
  return m;
}

}  // namespace synth
