#pragma once

#include "gea/image.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace gea {

// Parameterisations of the 3x4 photometric operator, by degrees of freedom.
//   Scalar    a = alpha*I, b = 0            (1)
//   DiagBias  diagonal a, free b            (6)
//   Linear9   free a, b = 0                 (9)
//   Affine12  free a, free b                (12)
// Scalar is contained in DiagBias and Linear9, both contained in Affine12.
enum class Family { Scalar, DiagBias, Linear9, Affine12 };

inline constexpr std::array<Family, 4> kAllFamilies = {Family::Scalar, Family::DiagBias,
                                                       Family::Linear9, Family::Affine12};

std::string_view family_name(Family f);
std::optional<Family> parse_family(std::string_view name);
int degrees_of_freedom(Family f);

// out = a * in + b per RGB pixel.
struct AnchorMatrix {
  Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Family family = Family::Affine12;

  static AnchorMatrix identity(Family f = Family::Affine12);

  // True when every entry is finite and the family's structural zeros hold
  // exactly.
  bool is_valid() const;
  // Row-major [a00 a01 a02 b0 a10 ...] view of the 12 parameters.
  std::array<double, 12> flat() const;
};

struct FitOptions {
  // Gram systems with a larger 2-norm condition number are rejected.
  double max_condition = 1e12;
  // Instead of throwing on a degenerate Gram system, return the minimum-norm
  // least-squares solution and flag it.
  bool allow_min_norm = false;
};

struct FitResult {
  AnchorMatrix matrix;
  double condition = 1.0;  // worst condition number among the solved systems
  bool min_norm = false;   // true when the minimum-norm fallback was used
};

// Unclamped per-pixel affine map. The identity matrix reproduces `img`
// bit-exactly.
ImageBuffer apply_anchor(const AnchorMatrix& m, const ImageBuffer& img);

// Closed-form least-squares minimiser of sum_p ||M aug(low_p) - gt_p||^2 over
// the given family. Each family is solved through its own normal equations
// (Cholesky, pivoted QR if the factorisation fails). Throws InvalidInput on
// shape mismatch and DegenerateFit when the Gram system is not identifiable.
AnchorMatrix fit_anchor(const ImageBuffer& low, const ImageBuffer& gt, Family family);
FitResult fit_anchor_detailed(const ImageBuffer& low, const ImageBuffer& gt, Family family,
                              const FitOptions& options = {});

// Mean squared error per sample of apply_anchor(m, low) against gt.
double fit_residual(const AnchorMatrix& m, const ImageBuffer& low, const ImageBuffer& gt);

// ||pred - star||_1 over all 12 entries + lambda_diag * ||pred.a - I||_F^2.
double matrix_loss(const AnchorMatrix& pred, const AnchorMatrix& star, double lambda_diag);

struct MatrixDiagnostics {
  double diag_mean = 0.0;
  double offdiag_mean = 0.0;
  double bias_mean = 0.0;
  bool diagonal_dominant = false;  // every row: |a_ii| > sum_{j != i} |a_ij|
  double input_mean_luma = 0.0;
  bool min_norm_solution = false;
};

MatrixDiagnostics diagnostics(const AnchorMatrix& m, const ImageBuffer& low);
MatrixDiagnostics diagnostics(const FitResult& fit, const ImageBuffer& low);

}  // namespace gea
