#pragma once

// Dense complex linear algebra shared by every other module. Matrices are
// plain Eigen types; the functions here add the Hermitian bookkeeping
// (validation, symmetrization, support cut-offs) the quantum code relies on.

#include <complex>
#include <functional>
#include <string_view>

#include <Eigen/Dense>

namespace qdiv {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Spectral decomposition m = vectors * diag(values) * vectors^dagger,
/// eigenvalues ascending.
struct HermEig {
  RVector values;
  CMatrix vectors;
};

/// Relative asymmetry ||m - m^dagger||_max / max(1, ||m||_max) above which a
/// matrix is rejected as non-Hermitian.
inline constexpr double kHermitianTolerance = 1e-8;

/// An eigenvalue lambda is in the support iff lambda > support_cutoff(lambda_max).
inline double support_cutoff(double lambda_max) {
  return 1e-10 * std::max(1.0, lambda_max);
}

void require_finite(const CMatrix& m, std::string_view what);
void require_square(const CMatrix& m, std::string_view what);

/// Relative anti-Hermitian residual used by the tolerance checks.
double hermiticity_residual(const CMatrix& m);

/// Validates a square, finite, Hermitian-within-tolerance matrix and returns
/// its Hermitian part (m + m^dagger) / 2.
CMatrix hermitian_part(const CMatrix& m, std::string_view what = "matrix");

HermEig eigh(const CMatrix& m);

/// Applies f to the spectrum of Hermitian m. With support_only, eigenvalues at
/// or below the support cut-off map to 0 and f is never evaluated there.
/// Throws DomainError if f returns a non-finite value.
CMatrix spectral_fn(const CMatrix& m, const std::function<double(double)>& f,
                    bool support_only = false);
CMatrix spectral_fn(const HermEig& eig, const std::function<double(double)>& f,
                    bool support_only = false);

/// Schatten-1 norm (sum of singular values).
double trace_norm(const CMatrix& m);
/// Largest singular value.
double operator_norm(const CMatrix& m);
double min_eig(const CMatrix& m);
double max_eig(const CMatrix& m);

/// Orthogonal projector onto the span of eigenvectors above the support cut-off.
CMatrix support_projector(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix identity(Eigen::Index d);

/// Column-stacking vectorization: vec(X)[i + j*rows] = X(i, j).
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

/// Polar factor U of m = U |m| (unitary for square m, an isometry for tall m).
/// Maximizes Re Tr(U^dagger m) over isometries.
CMatrix polar_unitary(const CMatrix& m);

}  // namespace qdiv
