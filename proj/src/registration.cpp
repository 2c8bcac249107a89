#include "gea/registration.hpp"

#include "gea/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace gea {

GeoWarp GeoWarp::translation(double tx, double ty) {
  GeoWarp w;
  w.p(0, 2) = tx;
  w.p(1, 2) = ty;
  return w;
}

GeoWarp GeoWarp::rotation(double degrees, double cx, double cy, double tx, double ty) {
  const double th = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  GeoWarp w;
  w.p << c, -s, cx - c * cx + s * cy + tx, s, c, cy - s * cx - c * cy + ty;
  return w;
}

bool GeoWarp::is_invertible() const {
  return p.allFinite() && std::abs(determinant()) > 1e-12;
}

GeoWarp GeoWarp::inverse() const {
  require(is_invertible(), "warp linear part is singular");
  const Eigen::Matrix2d a = p.leftCols<2>();
  const Eigen::Matrix2d ai = a.inverse();
  GeoWarp out;
  out.p.leftCols<2>() = ai;
  out.p.col(2) = -ai * p.col(2);
  return out;
}

std::string_view model_name(MotionModel m) {
  switch (m) {
    case MotionModel::Translation:
      return "translation";
    case MotionModel::Euclidean:
      return "euclidean";
    case MotionModel::Affine:
      return "affine";
  }
  return "?";
}

std::optional<MotionModel> parse_model(std::string_view name) {
  for (auto m : {MotionModel::Translation, MotionModel::Euclidean, MotionModel::Affine})
    if (model_name(m) == name) return m;
  return std::nullopt;
}

namespace {

// Single-channel plane with the layout the inner loops want.
struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  double at(int r, int c) const {
    return v[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)];
  }
};

Plane to_plane(const ImageBuffer& img) {
  const ImageBuffer g = to_grayscale(img);
  return {g.height(), g.width(), std::vector<double>(g.samples().begin(), g.samples().end())};
}

// Sub-pixel sources within this distance outside the grid still count as
// in bounds; they come from rounding in the warp arithmetic.
constexpr double kEdgeTol = 1e-9;

struct Tap {
  std::size_t i00, i01, i10, i11;
  double fx, fy;
};

// Bilinear taps for source (sx, sy) or false when out of bounds.
bool locate(double sx, double sy, int h, int w, Tap& t) {
  if (!(sx >= -kEdgeTol && sy >= -kEdgeTol && sx <= (w - 1) + kEdgeTol &&
        sy <= (h - 1) + kEdgeTol))
    return false;
  sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(std::floor(sx)), std::max(w - 2, 0));
  const int y0 = std::min(static_cast<int>(std::floor(sy)), std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  t.fx = sx - x0;
  t.fy = sy - y0;
  const auto W = static_cast<std::size_t>(w);
  t.i00 = static_cast<std::size_t>(y0) * W + static_cast<std::size_t>(x0);
  t.i01 = static_cast<std::size_t>(y0) * W + static_cast<std::size_t>(x1);
  t.i10 = static_cast<std::size_t>(y1) * W + static_cast<std::size_t>(x0);
  t.i11 = static_cast<std::size_t>(y1) * W + static_cast<std::size_t>(x1);
  return true;
}

// (1-f)a + f b is exact at f = 0 and f = 1.
double interp(const std::vector<double>& v, const Tap& t) {
  const double top = (1.0 - t.fx) * v[t.i00] + t.fx * v[t.i01];
  const double bot = (1.0 - t.fx) * v[t.i10] + t.fx * v[t.i11];
  return (1.0 - t.fy) * top + t.fy * bot;
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

Plane gaussian_blur(const Plane& src, double sigma) {
  if (sigma <= 0.0) return src;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& x : k) x /= total;
  Plane tmp{src.h, src.w, std::vector<double>(src.v.size())};
  for (int r = 0; r < src.h; ++r)
    for (int c = 0; c < src.w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] * src.at(r, reflect101(c + i, src.w));
      tmp.v[static_cast<std::size_t>(r) * static_cast<std::size_t>(src.w) + static_cast<std::size_t>(c)] = acc;
    }
  Plane out{src.h, src.w, std::vector<double>(src.v.size())};
  for (int r = 0; r < src.h; ++r)
    for (int c = 0; c < src.w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] * tmp.at(reflect101(r + i, src.h), c);
      out.v[static_cast<std::size_t>(r) * static_cast<std::size_t>(src.w) + static_cast<std::size_t>(c)] = acc;
    }
  return out;
}

// Central differences, one-sided at the borders.
void gradients(const Plane& p, Plane& gx, Plane& gy) {
  gx = Plane{p.h, p.w, std::vector<double>(p.v.size())};
  gy = Plane{p.h, p.w, std::vector<double>(p.v.size())};
  const auto W = static_cast<std::size_t>(p.w);
  for (int r = 0; r < p.h; ++r)
    for (int c = 0; c < p.w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * W + static_cast<std::size_t>(c);
      const int cl = std::max(c - 1, 0), cr = std::min(c + 1, p.w - 1);
      const int ru = std::max(r - 1, 0), rd = std::min(r + 1, p.h - 1);
      gx.v[i] = cr > cl ? (p.at(r, cr) - p.at(r, cl)) / (cr - cl) : 0.0;
      gy.v[i] = rd > ru ? (p.at(rd, c) - p.at(ru, c)) / (rd - ru) : 0.0;
    }
}

Plane downsample(const Plane& p) {
  const int h = std::max(1, p.h / 2), w = std::max(1, p.w / 2);
  Plane out{h, w, std::vector<double>(static_cast<std::size_t>(h) * static_cast<std::size_t>(w))};
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const int r0 = std::min(2 * r, p.h - 1), r1 = std::min(2 * r + 1, p.h - 1);
      const int c0 = std::min(2 * c, p.w - 1), c1 = std::min(2 * c + 1, p.w - 1);
      out.v[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)] =
          0.25 * (p.at(r0, c0) + p.at(r0, c1) + p.at(r1, c0) + p.at(r1, c1));
    }
  return out;
}

// ZNCC of `reference` against `input` sampled through `to_input` (reference
// grid -> input coordinates). Returns nullopt on zero variance.
std::optional<double> zncc(const Plane& input, const Plane& reference,
                           const Eigen::Matrix<double, 2, 3>& to_input) {
  std::vector<double> a, b;
  a.reserve(reference.v.size());
  b.reserve(reference.v.size());
  Tap t{};
  for (int r = 0; r < reference.h; ++r)
    for (int c = 0; c < reference.w; ++c) {
      const double sx = to_input(0, 0) * c + to_input(0, 1) * r + to_input(0, 2);
      const double sy = to_input(1, 0) * c + to_input(1, 1) * r + to_input(1, 2);
      if (!locate(sx, sy, input.h, input.w, t)) continue;
      a.push_back(interp(input.v, t));
      b.push_back(reference.at(r, c));
    }
  if (a.size() < 2) return std::nullopt;
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  // Standard deviation below 1e-12 is round-off on a flat image.
  const double floor = n * 1e-24;
  if (!(saa > floor) || !(sbb > floor)) return std::nullopt;
  return sab / (std::sqrt(saa) * std::sqrt(sbb));
}

int param_count(MotionModel m) {
  switch (m) {
    case MotionModel::Translation:
      return 2;
    case MotionModel::Euclidean:
      return 3;
    case MotionModel::Affine:
      return 6;
  }
  return 0;
}

// Parameter vector <-> reference-to-input 2x3 map.
Eigen::VectorXd to_params(const Eigen::Matrix<double, 2, 3>& q, MotionModel m) {
  Eigen::VectorXd v(param_count(m));
  switch (m) {
    case MotionModel::Translation:
      v << q(0, 2), q(1, 2);
      break;
    case MotionModel::Euclidean:
      v << std::atan2(q(1, 0), q(0, 0)), q(0, 2), q(1, 2);
      break;
    case MotionModel::Affine:
      v << q(0, 0), q(0, 1), q(0, 2), q(1, 0), q(1, 1), q(1, 2);
      break;
  }
  return v;
}

Eigen::Matrix<double, 2, 3> from_params(const Eigen::VectorXd& v, MotionModel m) {
  Eigen::Matrix<double, 2, 3> q = Eigen::Matrix<double, 2, 3>::Identity();
  switch (m) {
    case MotionModel::Translation:
      q(0, 2) = v(0);
      q(1, 2) = v(1);
      break;
    case MotionModel::Euclidean: {
      const double c = std::cos(v(0)), s = std::sin(v(0));
      q << c, -s, v(1), s, c, v(2);
      break;
    }
    case MotionModel::Affine:
      q << v(0), v(1), v(2), v(3), v(4), v(5);
      break;
  }
  return q;
}

// Coarse-level map to the next finer level (pixel centres: x_f = 2 x_c + 0.5).
Eigen::Matrix<double, 2, 3> refine_map(const Eigen::Matrix<double, 2, 3>& q) {
  Eigen::Matrix<double, 2, 3> out = q;
  const Eigen::Vector2d half(0.5, 0.5);
  out.col(2) = 2.0 * q.col(2) - q.leftCols<2>() * half + half;
  return out;
}

Eigen::Matrix<double, 2, 3> coarsen_map(const Eigen::Matrix<double, 2, 3>& q) {
  Eigen::Matrix<double, 2, 3> out = q;
  const Eigen::Vector2d half(0.5, 0.5);
  out.col(2) = 0.5 * (q.col(2) + q.leftCols<2>() * half - half);
  return out;
}

struct LevelOutcome {
  Eigen::Matrix<double, 2, 3> best;
  int iterations = 0;
  bool converged = false;
};

// One forward-additive ECC run at a single scale. `q` maps reference pixel
// coordinates to input coordinates.
LevelOutcome ecc_level(const Plane& input_raw, const Plane& reference_raw,
                       Eigen::Matrix<double, 2, 3> q, const EccOptions& opt) {
  const Plane input = gaussian_blur(input_raw, opt.smoothing_sigma);
  const Plane reference = gaussian_blur(reference_raw, opt.smoothing_sigma);
  Plane gx, gy;
  gradients(input, gx, gy);

  const int k = param_count(opt.model);
  const int h = reference.h, w = reference.w;
  const std::size_t total = reference.v.size();
  const std::size_t min_valid = std::max<std::size_t>(static_cast<std::size_t>(4 * k), total / 16);

  Eigen::VectorXd params = to_params(q, opt.model);
  LevelOutcome out{q, 0, false};
  double best_rho = -2.0;
  double last_rho = -2.0;
  // Step control: a step that lowers the correlation (or leaves the overlap)
  // is retried at half length, up to kMaxHalvings times.
  constexpr int kMaxHalvings = 8;
  Eigen::VectorXd prev_params, prev_delta;
  int halvings = 0;
  auto retry_shorter = [&] {
    if (prev_delta.size() == 0 || halvings >= kMaxHalvings) return false;
    prev_delta *= 0.5;
    params = prev_params + prev_delta;
    ++halvings;
    return true;
  };

  std::vector<double> iw, tw;
  std::vector<int> xs, ys;
  Eigen::MatrixXd jac;

  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    out.iterations = iter;
    q = from_params(params, opt.model);
    if (!q.allFinite() || std::abs(q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0)) < 1e-6) {
      if (retry_shorter()) continue;
      break;
    }

    iw.clear();
    tw.clear();
    xs.clear();
    ys.clear();
    std::vector<double> wgx, wgy;
    wgx.reserve(total);
    wgy.reserve(total);
    Tap t{};
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const double sx = q(0, 0) * c + q(0, 1) * r + q(0, 2);
        const double sy = q(1, 0) * c + q(1, 1) * r + q(1, 2);
        if (!locate(sx, sy, input.h, input.w, t)) continue;
        iw.push_back(interp(input.v, t));
        wgx.push_back(interp(gx.v, t));
        wgy.push_back(interp(gy.v, t));
        tw.push_back(reference.at(r, c));
        xs.push_back(c);
        ys.push_back(r);
      }
    const std::size_t n = iw.size();
    if (n < min_valid) {
      if (retry_shorter()) continue;
      break;
    }

    Eigen::Map<Eigen::VectorXd> img(iw.data(), static_cast<Eigen::Index>(n));
    Eigen::Map<Eigen::VectorXd> tmp(tw.data(), static_cast<Eigen::Index>(n));
    img.array() -= img.mean();
    tmp.array() -= tmp.mean();
    const double img_norm = img.norm(), tmp_norm = tmp.norm();
    if (!(img_norm > 0.0) || !(tmp_norm > 0.0)) break;

    const double correlation = img.dot(tmp);
    const double rho = correlation / (img_norm * tmp_norm);
    if (rho > best_rho) {
      best_rho = rho;
      out.best = q;
    }
    if (rho < last_rho - opt.eps && retry_shorter()) continue;
    if (std::abs(rho - last_rho) < opt.eps) {
      out.converged = true;
      break;
    }
    last_rho = rho;
    halvings = 0;

    jac.resize(static_cast<Eigen::Index>(n), k);
    const double th = opt.model == MotionModel::Euclidean ? params(0) : 0.0;
    const double ct = std::cos(th), st = std::sin(th);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = xs[i], y = ys[i], ix = wgx[i], iy = wgy[i];
      const auto row = static_cast<Eigen::Index>(i);
      switch (opt.model) {
        case MotionModel::Translation:
          jac(row, 0) = ix;
          jac(row, 1) = iy;
          break;
        case MotionModel::Euclidean:
          jac(row, 0) = ix * (-st * x - ct * y) + iy * (ct * x - st * y);
          jac(row, 1) = ix;
          jac(row, 2) = iy;
          break;
        case MotionModel::Affine:
          jac(row, 0) = ix * x;
          jac(row, 1) = ix * y;
          jac(row, 2) = ix;
          jac(row, 3) = iy * x;
          jac(row, 4) = iy * y;
          jac(row, 5) = iy;
          break;
      }
    }
    // Zero-mean columns: the linearisation of the zero-mean warped image.
    jac.rowwise() -= jac.colwise().mean();

    const Eigen::MatrixXd hessian = jac.transpose() * jac;
    const Eigen::LDLT<Eigen::MatrixXd> solver(hessian);
    if (solver.info() != Eigen::Success) break;
    const Eigen::VectorXd img_proj = jac.transpose() * img;
    const Eigen::VectorXd tmp_proj = jac.transpose() * tmp;
    const Eigen::VectorXd img_proj_h = solver.solve(img_proj);
    const double lambda_n = img_norm * img_norm - img_proj.dot(img_proj_h);
    const double lambda_d = correlation - tmp_proj.dot(img_proj_h);
    if (!(lambda_d > 0.0)) break;
    const double lambda = lambda_n / lambda_d;
    const Eigen::VectorXd error = lambda * tmp - img;
    const Eigen::VectorXd delta = solver.solve(jac.transpose() * error);
    if (!delta.allFinite()) break;
    prev_params = params;
    prev_delta = delta;
    params += delta;
  }
  return out;
}

}  // namespace

WarpedImage warp_image(const ImageBuffer& img, const GeoWarp& w, int out_h, int out_w) {
  require(w.is_invertible(), "warp_image: warp linear part is singular");
  require(out_h >= 1 && out_w >= 1, "warp_image: output size must be positive");
  const GeoWarp inv = w.inverse();
  const int cn = img.channels();
  WarpedImage out{ImageBuffer(out_h, out_w, cn), ImageBuffer(out_h, out_w, 1)};
  std::vector<std::vector<double>> planes;
  for (int ch = 0; ch < cn; ++ch) {
    const ImageBuffer p = img.channel(ch);
    planes.emplace_back(p.samples().begin(), p.samples().end());
  }
  Tap t{};
  for (int r = 0; r < out_h; ++r)
    for (int c = 0; c < out_w; ++c) {
      const Eigen::Vector2d s = inv.apply(c, r);
      if (!locate(s.x(), s.y(), img.height(), img.width(), t)) continue;
      out.mask.at(r, c) = 1.0;
      for (int ch = 0; ch < cn; ++ch) out.image.at(r, c, ch) = interp(planes[static_cast<std::size_t>(ch)], t);
    }
  return out;
}

double ecc_value(const ImageBuffer& input, const ImageBuffer& reference, const GeoWarp& w) {
  require(w.is_invertible(), "ecc_value: warp linear part is singular");
  const auto v = zncc(to_plane(input), to_plane(reference), w.inverse().p);
  if (!v) throw DegenerateInput("ZNCC undefined: zero-variance image over the valid region");
  return *v;
}

EccResult ecc_register(const ImageBuffer& input, const ImageBuffer& reference,
                       const EccOptions& options) {
  require(input.same_size(reference), "ecc_register: image sizes differ");
  require(options.max_iters >= 1, "ecc_register: max_iters must be >= 1");
  require(options.eps > 0.0, "ecc_register: eps must be > 0");
  require(options.pyramid_levels >= 0, "ecc_register: pyramid_levels must be >= 0");

  const Plane in0 = to_plane(input);
  const Plane ref0 = to_plane(reference);
  const Eigen::Matrix<double, 2, 3> identity = Eigen::Matrix<double, 2, 3>::Identity();
  const auto start = zncc(in0, ref0, identity);
  if (!start) throw DegenerateInput("ZNCC undefined: zero-variance input or reference image");

  int levels = options.pyramid_levels;
  if (levels == 0) {
    // Halve while the coarsest level keeps >= 64 px on its short side.
    levels = 1;
    for (int side = std::min(input.height(), input.width()); side / 2 >= 64; side /= 2) ++levels;
  }

  std::vector<Plane> in_pyr{in0}, ref_pyr{ref0};
  for (int l = 1; l < levels; ++l) {
    if (std::min(in_pyr.back().h, in_pyr.back().w) < 32) break;
    in_pyr.push_back(downsample(in_pyr.back()));
    ref_pyr.push_back(downsample(ref_pyr.back()));
  }

  Eigen::Matrix<double, 2, 3> q = identity;
  for (std::size_t l = 1; l < in_pyr.size(); ++l) q = coarsen_map(q);

  EccResult result;
  for (std::size_t l = in_pyr.size(); l-- > 0;) {
    const LevelOutcome lv = ecc_level(in_pyr[l], ref_pyr[l], q, options);
    result.iterations += lv.iterations;
    result.converged = lv.converged;
    q = lv.best;
    if (l > 0) q = refine_map(q);
  }

  // Never return something worse than where we started.
  const double start_score = *start;
  std::optional<double> score;
  if (std::abs(q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0)) > 1e-12 && q.allFinite())
    score = zncc(in0, ref0, q);
  if (!score || *score < start_score) {
    q = identity;
    score = start_score;
  }
  GeoWarp to_input;
  to_input.p = q;
  result.warp = to_input.inverse();
  result.final_ecc = *score;
  return result;
}

CropRect shared_valid_crop(std::span<const ImageBuffer> masks, int margin) {
  require(!masks.empty(), "shared_valid_crop needs at least one mask");
  require(margin >= 0, "margin must be >= 0");
  const int h = masks.front().height(), w = masks.front().width();
  for (const auto& m : masks)
    require(m.channels() == 1 && m.height() == h && m.width() == w,
            "masks must be single-channel with equal dimensions");

  // Prefix sums of zero (invalid) pixels in the intersection.
  const auto W1 = static_cast<std::size_t>(w) + 1;
  std::vector<long> zeros((static_cast<std::size_t>(h) + 1) * W1, 0);
  int top = h, bottom = -1, left = w, right = -1;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      bool ok = true;
      for (const auto& m : masks) ok = ok && m.at(r, c) == 1.0;
      if (ok) {
        top = std::min(top, r);
        bottom = std::max(bottom, r);
        left = std::min(left, c);
        right = std::max(right, c);
      }
      const auto i = static_cast<std::size_t>(r + 1) * W1 + static_cast<std::size_t>(c + 1);
      zeros[i] = (ok ? 0 : 1) + zeros[i - 1] + zeros[i - W1] - zeros[i - W1 - 1];
    }
  if (bottom < 0) throw EmptyRegion("masks have no common valid pixel");

  auto count = [&](int r0, int c0, int r1, int c1) {  // inclusive
    const auto a = static_cast<std::size_t>(r0), b = static_cast<std::size_t>(c0);
    const auto c = static_cast<std::size_t>(r1) + 1, d = static_cast<std::size_t>(c1) + 1;
    return zeros[c * W1 + d] - zeros[a * W1 + d] - zeros[c * W1 + b] + zeros[a * W1 + b];
  };

  // Peel the edge carrying the most invalid pixels until the box is clean.
  while (top <= bottom && left <= right && count(top, left, bottom, right) > 0) {
    const long zt = count(top, left, top, right);
    const long zb = count(bottom, left, bottom, right);
    const long zl = count(top, left, bottom, left);
    const long zr = count(top, right, bottom, right);
    const long worst = std::max({zt, zb, zl, zr});
    if (zt == worst)
      ++top;
    else if (zb == worst)
      --bottom;
    else if (zl == worst)
      ++left;
    else
      --right;
  }
  CropRect rect{top + margin, left + margin, bottom - top + 1 - 2 * margin,
                right - left + 1 - 2 * margin};
  if (top > bottom || left > right || rect.rows <= 0 || rect.cols <= 0)
    throw EmptyRegion("shared valid region is empty after applying margin " +
                      std::to_string(margin));
  return rect;
}

RegisteredPair register_pair(const ImageBuffer& low, const ImageBuffer& gt, int margin,
                             const EccOptions& options) {
  require(low.same_shape(gt), "register_pair: low and gt dimensions differ");
  RegisteredPair out;
  out.ecc = ecc_register(low, gt, options);
  const WarpedImage warped = warp_image(low, out.ecc.warp, gt.height(), gt.width());
  const ImageBuffer gt_mask(gt.height(), gt.width(), 1, 1.0);
  const std::vector<ImageBuffer> masks{warped.mask, gt_mask};
  out.crop = shared_valid_crop(masks, margin);
  const CropRect& c = out.crop;
  out.low = warped.image.crop(c.row0, c.col0, c.rows, c.cols);
  out.gt = gt.crop(c.row0, c.col0, c.rows, c.cols);
  return out;
}

}  // namespace gea
