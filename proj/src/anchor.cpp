#include "gea/anchor.hpp"

#include "gea/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <sstream>

namespace gea {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Scalar:
      return "scalar";
    case Family::DiagBias:
      return "diag_bias";
    case Family::Linear9:
      return "linear9";
    case Family::Affine12:
      return "affine12";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  for (Family f : kAllFamilies)
    if (family_name(f) == name) return f;
  return std::nullopt;
}

int degrees_of_freedom(Family f) {
  switch (f) {
    case Family::Scalar:
      return 1;
    case Family::DiagBias:
      return 6;
    case Family::Linear9:
      return 9;
    case Family::Affine12:
      return 12;
  }
  return 0;
}

AnchorMatrix AnchorMatrix::identity(Family f) {
  AnchorMatrix m;
  m.family = f;
  return m;
}

bool AnchorMatrix::is_valid() const {
  if (!a.allFinite() || !b.allFinite()) return false;
  const bool off_diag_zero = a(0, 1) == 0.0 && a(0, 2) == 0.0 && a(1, 0) == 0.0 &&
                             a(1, 2) == 0.0 && a(2, 0) == 0.0 && a(2, 1) == 0.0;
  const bool bias_zero = (b.array() == 0.0).all();
  switch (family) {
    case Family::Scalar:
      return off_diag_zero && bias_zero && a(0, 0) == a(1, 1) && a(1, 1) == a(2, 2);
    case Family::DiagBias:
      return off_diag_zero;
    case Family::Linear9:
      return bias_zero;
    case Family::Affine12:
      return true;
  }
  return false;
}

std::array<double, 12> AnchorMatrix::flat() const {
  std::array<double, 12> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(4 * r + c)] = a(r, c);
    out[static_cast<std::size_t>(4 * r + 3)] = b(r);
  }
  return out;
}

ImageBuffer apply_anchor(const AnchorMatrix& m, const ImageBuffer& img) {
  require(img.channels() == 3, "apply_anchor requires a 3-channel image");
  require(m.a.allFinite() && m.b.allFinite(), "anchor matrix must be finite");
  ImageBuffer out(img.height(), img.width(), 3);
  auto src = img.samples();
  auto dst = out.samples();
  const auto& a = m.a;
  const auto& b = m.b;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const double r = src[3 * p], g = src[3 * p + 1], bl = src[3 * p + 2];
    for (int k = 0; k < 3; ++k)
      dst[3 * p + static_cast<std::size_t>(k)] = a(k, 0) * r + a(k, 1) * g + a(k, 2) * bl + b(k);
  }
  return out;
}

namespace {

struct Moments {
  Eigen::Matrix4d gram = Eigen::Matrix4d::Zero();   // sum aug aug^T
  Eigen::Matrix<double, 4, 3> cross =               // sum aug gt^T
      Eigen::Matrix<double, 4, 3>::Zero();
  double n = 0.0;
};

// Row partial sums are folded into the total so the summation tree is fixed
// and short.
Moments accumulate(const ImageBuffer& low, const ImageBuffer& gt) {
  Moments total;
  for (int r = 0; r < low.height(); ++r) {
    Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 4, 3> c = Eigen::Matrix<double, 4, 3>::Zero();
    for (int col = 0; col < low.width(); ++col) {
      auto x = low.pixel(r, col);
      auto y = gt.pixel(r, col);
      const Eigen::Vector4d aug(x[0], x[1], x[2], 1.0);
      const Eigen::Vector3d t(y[0], y[1], y[2]);
      g.noalias() += aug * aug.transpose();
      c.noalias() += aug * t.transpose();
    }
    total.gram += g;
    total.cross += c;
  }
  total.n = static_cast<double>(low.pixel_count());
  return total;
}

template <int K, int M>
Eigen::Matrix<double, K, M> solve_normal(const Eigen::Matrix<double, K, K>& gram,
                                         const Eigen::Matrix<double, K, M>& rhs, Family family,
                                         const FitOptions& options, FitResult& result) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, K, K>> eig(gram, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(K - 1);
  const double cond =
      (lmin > 0.0 && lmax > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
  result.condition = std::max(result.condition, cond);

  if (!(cond <= options.max_condition)) {
    if (!options.allow_min_norm) {
      std::ostringstream msg;
      msg << "degenerate fit for family '" << family_name(family)
          << "': Gram condition number " << cond << " exceeds " << options.max_condition;
      throw DegenerateFit(std::string(family_name(family)), msg.str());
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<double, K, K>> cod(gram);
    cod.setThreshold(1.0 / options.max_condition);
    result.min_norm = true;
    return cod.solve(rhs);
  }

  Eigen::LLT<Eigen::Matrix<double, K, K>> llt(gram);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  return Eigen::ColPivHouseholderQR<Eigen::Matrix<double, K, K>>(gram).solve(rhs);
}

}  // namespace

FitResult fit_anchor_detailed(const ImageBuffer& low, const ImageBuffer& gt, Family family,
                              const FitOptions& options) {
  require(low.channels() == 3 && gt.channels() == 3, "fit_anchor requires 3-channel images");
  require(low.same_shape(gt), "fit_anchor: low and gt dimensions differ");
  require(low.pixel_count() >= 4, "fit_anchor needs at least 4 pixels");

  const Moments mom = accumulate(low, gt);
  FitResult result;
  result.matrix.family = family;
  AnchorMatrix& m = result.matrix;

  switch (family) {
    case Family::Scalar: {
      // alpha = <low, gt> / <low, low> over all samples.
      Eigen::Matrix<double, 1, 1> g;
      Eigen::Matrix<double, 1, 1> rhs;
      g(0, 0) = mom.gram(0, 0) + mom.gram(1, 1) + mom.gram(2, 2);
      rhs(0, 0) = mom.cross(0, 0) + mom.cross(1, 1) + mom.cross(2, 2);
      const double alpha = solve_normal<1, 1>(g, rhs, family, options, result)(0, 0);
      m.a = alpha * Eigen::Matrix3d::Identity();
      break;
    }
    case Family::DiagBias: {
      // Three independent (gain, bias) systems.
      m.a.setZero();
      for (int k = 0; k < 3; ++k) {
        Eigen::Matrix2d g;
        g << mom.gram(k, k), mom.gram(k, 3), mom.gram(3, k), mom.n;
        Eigen::Vector2d rhs(mom.cross(k, k), mom.cross(3, k));
        const Eigen::Vector2d sol = solve_normal<2, 1>(g, rhs, family, options, result);
        m.a(k, k) = sol(0);
        m.b(k) = sol(1);
      }
      break;
    }
    case Family::Linear9: {
      const Eigen::Matrix3d g = mom.gram.topLeftCorner<3, 3>();
      const Eigen::Matrix3d rhs = mom.cross.topRows<3>();
      m.a = solve_normal<3, 3>(g, rhs, family, options, result).transpose();
      break;
    }
    case Family::Affine12: {
      const Eigen::Matrix<double, 4, 3> x =
          solve_normal<4, 3>(mom.gram, mom.cross, family, options, result);
      m.a = x.topRows<3>().transpose();
      m.b = x.row(3).transpose();
      break;
    }
  }

  if (!m.a.allFinite() || !m.b.allFinite())
    throw DegenerateFit(std::string(family_name(family)),
                        "non-finite solution for family '" + std::string(family_name(family)) +
                            "'");
  return result;
}

AnchorMatrix fit_anchor(const ImageBuffer& low, const ImageBuffer& gt, Family family) {
  return fit_anchor_detailed(low, gt, family).matrix;
}

double fit_residual(const AnchorMatrix& m, const ImageBuffer& low, const ImageBuffer& gt) {
  require(low.channels() == 3 && gt.channels() == 3, "fit_residual requires 3-channel images");
  require(low.same_shape(gt), "fit_residual: low and gt dimensions differ");
  const ImageBuffer pred = apply_anchor(m, low);
  auto p = pred.samples();
  auto t = gt.samples();
  double total = 0.0;
  for (int r = 0; r < low.height(); ++r) {
    double row_sum = 0.0;
    const std::size_t begin = static_cast<std::size_t>(r) * static_cast<std::size_t>(low.width()) * 3;
    const std::size_t end = begin + static_cast<std::size_t>(low.width()) * 3;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = p[i] - t[i];
      row_sum += d * d;
    }
    total += row_sum;
  }
  return total / static_cast<double>(p.size());
}

double matrix_loss(const AnchorMatrix& pred, const AnchorMatrix& star, double lambda_diag) {
  const double l1 = (pred.a - star.a).cwiseAbs().sum() + (pred.b - star.b).cwiseAbs().sum();
  const double reg = (pred.a - Eigen::Matrix3d::Identity()).squaredNorm();
  return l1 + lambda_diag * reg;
}

MatrixDiagnostics diagnostics(const AnchorMatrix& m, const ImageBuffer& low) {
  MatrixDiagnostics d;
  d.diag_mean = m.a.diagonal().mean();
  d.offdiag_mean = (m.a.sum() - m.a.diagonal().sum()) / 6.0;
  d.bias_mean = m.b.mean();
  d.diagonal_dominant = true;
  for (int i = 0; i < 3; ++i) {
    double off = 0.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) off += std::abs(m.a(i, j));
    if (!(std::abs(m.a(i, i)) > off)) d.diagonal_dominant = false;
  }
  d.input_mean_luma = mean(to_grayscale(low));
  return d;
}

MatrixDiagnostics diagnostics(const FitResult& fit, const ImageBuffer& low) {
  MatrixDiagnostics d = diagnostics(fit.matrix, low);
  d.min_norm_solution = fit.min_norm;
  return d;
}

}  // namespace gea
