#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace ddlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
/// Column i of `eigenvectors` pairs with `eigenvalues[i]`.
struct Eigendecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// Ordered spectrum of a PSD matrix together with the statistics the bounds
/// consume.
///
/// `tail_sums[k]` is the sum of the eigenvalues after the first k (so
/// `tail_sums[0]` is the trace and `tail_sums.back()` is 0); its length is
/// `eigenvalues.size() + 1`.
struct SpectrumSummary {
  std::vector<double> eigenvalues;
  Index rank = 0;
  double lambda_min_plus = 0.0;
  double lambda_max = 0.0;
  double condition_number = 0.0;
  std::vector<double> tail_sums;
};

/// Orthogonal projector U U^T onto the span of orthonormal columns U.
struct Projector {
  Matrix matrix;
  Index rank = 0;
};

/// Orthonormal basis of the range of a sample covariance X^T X / n together
/// with the matching (strictly positive) eigenvalues, descending.
struct RangeBasis {
  Vector eigenvalues;
  Matrix basis;  // d x r
  double rank_tolerance = 0.0;

  Index rank() const { return eigenvalues.size(); }
  double lambda_min_plus() const;
  double lambda_max() const;
};

/// Decomposes a symmetric matrix. Rejects non-finite entries and matrices
/// whose entrywise relative asymmetry exceeds 1e-10.
Eigendecomposition sym_eigendecompose(const Matrix& m);

/// Numerical-rank threshold max(n, d) * lambda_max * 1e-12.
double default_rank_tolerance(double lambda_max, Index n, Index d);

/// Builds a summary from descending eigenvalues. Values within (-tol, tol)
/// are clamped to zero; a spectrum without any eigenvalue above `rank_tol`
/// raises ZeroMatrixError.
SpectrumSummary spectrum_summary(std::span<const double> eigenvalues, double rank_tol);

SpectrumSummary spectrum_summary(const Vector& eigenvalues, double rank_tol);

Projector projector_range(const Matrix& eigenvectors);

/// sqrt(x^T m x) for PSD m.
double seminorm(const Vector& x, const Matrix& m);

/// Uncentered sample covariance X^T X / n of the rows of `x`.
Matrix sample_covariance(const Matrix& x);

/// All min(n, d) eigenvalues of X^T X / n, descending. When n < d the n x n
/// Gram matrix X X^T / n is decomposed instead (same non-zero spectrum).
Vector covariance_eigenvalues(const Matrix& x);

/// Spectrum summary of X^T X / n using the default rank tolerance.
SpectrumSummary covariance_spectrum(const Matrix& x);

/// Range basis of X^T X / n, computed through whichever of the d x d
/// covariance or n x n Gram matrix is smaller.
RangeBasis covariance_range(const Matrix& x);

/// Largest absolute entry of U^T U - I.
double orthonormality_defect(const Matrix& u);

}  // namespace linalg
}  // namespace ddlab
