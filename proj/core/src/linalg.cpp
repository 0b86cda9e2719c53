#include "qdiv/linalg.hpp"

#include <cmath>
#include <string>

#include "qdiv/errors.hpp"

namespace qdiv {

void require_finite(const CMatrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + ": non-finite entries");
  }
}

void require_square(const CMatrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

double hermiticity_residual(const CMatrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

CMatrix hermitian_part(const CMatrix& m, std::string_view what) {
  require_square(m, what);
  require_finite(m, what);
  const double residual = hermiticity_residual(m);
  if (residual > kHermitianTolerance) {
    throw DomainError(std::string(what) + ": not Hermitian (relative residual " +
                      std::to_string(residual) + ")");
  }
  return (m + m.adjoint()) / 2.0;
}

HermEig eigh(const CMatrix& m) {
  const CMatrix h = hermitian_part(m, "eigh");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw SolverError("eigh: Hermitian eigensolver did not converge", "numerical-failure");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix spectral_fn(const HermEig& eig, const std::function<double(double)>& f,
                    bool support_only) {
  const Eigen::Index n = eig.values.size();
  const double cutoff = support_cutoff(n > 0 ? eig.values.maxCoeff() : 0.0);
  RVector mapped(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = eig.values[i];
    if (support_only && lambda <= cutoff) {
      mapped[i] = 0.0;
      continue;
    }
    const double v = f(lambda);
    if (!std::isfinite(v)) {
      throw DomainError("spectral_fn: function undefined at eigenvalue " + std::to_string(lambda));
    }
    mapped[i] = v;
  }
  CMatrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.adjoint();
  return (out + out.adjoint()) / 2.0;
}

CMatrix spectral_fn(const CMatrix& m, const std::function<double(double)>& f,
                    bool support_only) {
  return spectral_fn(eigh(m), f, support_only);
}

double trace_norm(const CMatrix& m) {
  require_square(m, "trace_norm");
  require_finite(m, "trace_norm");
  if (hermiticity_residual(m) <= 1e-14) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver((m + m.adjoint()) / 2.0,
                                                  Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().sum();
}

double operator_norm(const CMatrix& m) {
  require_finite(m, "operator_norm");
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()[0];
}

double min_eig(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m, "min_eig"),
                                                Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

double max_eig(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m, "max_eig"),
                                                Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[solver.eigenvalues().size() - 1];
}

CMatrix support_projector(const CMatrix& m) {
  return spectral_fn(m, [](double) { return 1.0; }, true);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw DimensionError("unvec: size mismatch");
  }
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

CMatrix polar_unitary(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace qdiv
