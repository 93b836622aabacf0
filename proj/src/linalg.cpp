#include "ddlab/linalg.hpp"

#include "ddlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddlab::linalg {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kOrthonormalTol = 1e-10;

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw LinalgError(std::string(what) + ": matrix has non-finite entries");
  }
}

Eigendecomposition descending(const Eigen::SelfAdjointEigenSolver<Matrix>& solver) {
  Eigendecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace

double RangeBasis::lambda_min_plus() const {
  if (eigenvalues.size() == 0) throw ZeroMatrixError("range basis is empty: zero matrix");
  return eigenvalues(eigenvalues.size() - 1);
}

double RangeBasis::lambda_max() const {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues(0);
}

Eigendecomposition sym_eigendecompose(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw InvalidArgument("sym_eigendecompose: matrix is not square");
  }
  require_finite(m, "sym_eigendecompose");
  const double scale = m.cwiseAbs().maxCoeff();
  double worst = 0.0;
  bool asymmetric = false;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = j + 1; i < m.rows(); ++i) {
      const double gap = std::abs(m(i, j) - m(j, i));
      const double ref = std::max({std::abs(m(i, j)), std::abs(m(j, i)), 1e-6 * scale});
      worst = std::max(worst, gap);
      if (gap > kSymmetryTol * ref) asymmetric = true;
    }
  }
  if (asymmetric) {
    std::ostringstream msg;
    msg << "sym_eigendecompose: matrix is not symmetric (max asymmetry " << worst << ")";
    throw LinalgError(msg.str());
  }
  if (m.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw LinalgError("sym_eigendecompose: eigensolver did not converge");
  }
  return descending(solver);
}

double default_rank_tolerance(double lambda_max, Index n, Index d) {
  return static_cast<double>(std::max(n, d)) * std::max(lambda_max, 0.0) * 1e-12;
}

SpectrumSummary spectrum_summary(std::span<const double> eigenvalues, double rank_tol) {
  if (rank_tol < 0.0 || !std::isfinite(rank_tol)) {
    throw InvalidArgument("spectrum_summary: rank tolerance must be finite and non-negative");
  }
  SpectrumSummary s;
  s.eigenvalues.reserve(eigenvalues.size());
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    double v = eigenvalues[i];
    if (!std::isfinite(v)) throw LinalgError("spectrum_summary: non-finite eigenvalue");
    if (i > 0 && v > eigenvalues[i - 1] + rank_tol) {
      throw InvalidArgument("spectrum_summary: eigenvalues are not in descending order");
    }
    if (v <= -rank_tol && v < 0.0) {
      std::ostringstream msg;
      msg << "spectrum_summary: eigenvalue " << v << " is negative beyond tolerance " << rank_tol;
      throw LinalgError(msg.str());
    }
    if (std::abs(v) < rank_tol || v < 0.0) v = 0.0;
    s.eigenvalues.push_back(v);
  }
  for (double v : s.eigenvalues) {
    if (v > rank_tol) ++s.rank;
  }
  if (s.rank == 0) {
    throw ZeroMatrixError("spectrum_summary: zero matrix (no eigenvalue above rank tolerance)");
  }
  s.lambda_max = s.eigenvalues.front();
  s.lambda_min_plus = s.eigenvalues[static_cast<std::size_t>(s.rank - 1)];
  s.condition_number = s.lambda_max / s.lambda_min_plus;

  // Suffix sums accumulated from the small end keep the tail exact at zero.
  s.tail_sums.assign(s.eigenvalues.size() + 1, 0.0);
  for (std::size_t k = s.eigenvalues.size(); k-- > 0;) {
    s.tail_sums[k] = s.tail_sums[k + 1] + s.eigenvalues[k];
  }
  return s;
}

SpectrumSummary spectrum_summary(const Vector& eigenvalues, double rank_tol) {
  return spectrum_summary(std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())),
                          rank_tol);
}

double orthonormality_defect(const Matrix& u) {
  if (u.cols() == 0) return 0.0;
  const Matrix gram = u.transpose() * u;
  return (gram - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

Projector projector_range(const Matrix& eigenvectors) {
  require_finite(eigenvectors, "projector_range");
  const double defect = orthonormality_defect(eigenvectors);
  if (defect > kOrthonormalTol) {
    std::ostringstream msg;
    msg << "projector_range: columns are not orthonormal (max |U^T U - I| = " << defect << ")";
    throw LinalgError(msg.str());
  }
  Projector p;
  p.matrix = eigenvectors * eigenvectors.transpose();
  p.rank = eigenvectors.cols();
  return p;
}

double seminorm(const Vector& x, const Matrix& m) {
  if (m.rows() != x.size() || m.cols() != x.size()) {
    throw InvalidArgument("seminorm: dimension mismatch");
  }
  const double q = x.dot(m * x);
  const double scale = x.squaredNorm() * (m.size() ? m.cwiseAbs().maxCoeff() : 0.0) *
                       static_cast<double>(std::max<Index>(x.size(), 1));
  // Floor of ||x||^2 so that near-zero matrices such as I - P for a
  // full-rank projector P do not trip on roundoff.
  if (q < -1e-12 * std::max({scale, x.squaredNorm(), 1e-300})) {
    std::ostringstream msg;
    msg << "seminorm: matrix is not PSD (x^T M x = " << q << ")";
    throw LinalgError(msg.str());
  }
  return std::sqrt(std::max(q, 0.0));
}

Matrix sample_covariance(const Matrix& x) {
  if (x.rows() == 0) throw InvalidArgument("sample_covariance: no rows");
  Matrix s(x.cols(), x.cols());
  s.setZero();
  s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(x.rows()));
  return s.selfadjointView<Eigen::Lower>();
}

namespace {

Matrix gram_matrix(const Matrix& x) {
  Matrix g(x.rows(), x.rows());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(x.rows()));
  return g.selfadjointView<Eigen::Lower>();
}

}  // namespace

Vector covariance_eigenvalues(const Matrix& x) {
  require_finite(x, "covariance_eigenvalues");
  if (x.rows() == 0) throw InvalidArgument("covariance_eigenvalues: no rows");
  const Matrix m = x.rows() < x.cols() ? gram_matrix(x) : sample_covariance(x);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw LinalgError("covariance_eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

SpectrumSummary covariance_spectrum(const Matrix& x) {
  const Vector ev = covariance_eigenvalues(x);
  return spectrum_summary(ev, default_rank_tolerance(ev.size() ? ev(0) : 0.0, x.rows(), x.cols()));
}

RangeBasis covariance_range(const Matrix& x) {
  require_finite(x, "covariance_range");
  const Index n = x.rows();
  const Index d = x.cols();
  if (n == 0) throw InvalidArgument("covariance_range: no rows");
  RangeBasis out;
  if (n < d) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram_matrix(x));
    if (solver.info() != Eigen::Success) throw LinalgError("covariance_range: eigensolver failed");
    const Vector ev = solver.eigenvalues().reverse();
    const Matrix u = solver.eigenvectors().rowwise().reverse();
    out.rank_tolerance = default_rank_tolerance(ev(0), n, d);
    Index r = 0;
    while (r < ev.size() && ev(r) > out.rank_tolerance) ++r;
    out.eigenvalues = ev.head(r);
    // Right singular vectors: v_i = X^T u_i / sqrt(n lambda_i).
    out.basis = x.transpose() * u.leftCols(r);
    for (Index i = 0; i < r; ++i) {
      out.basis.col(i) /= std::sqrt(static_cast<double>(n) * ev(i));
    }
    // One reorthogonalization pass; the pairing with eigenvalues is unchanged
    // to first order and the spanned subspace is unchanged exactly.
    if (r > 0 && orthonormality_defect(out.basis) > 1e-12) {
      Eigen::HouseholderQR<Matrix> qr(out.basis);
      Matrix q = qr.householderQ() * Matrix::Identity(d, r);
      for (Index i = 0; i < r; ++i) {
        if (q.col(i).dot(out.basis.col(i)) < 0.0) q.col(i) *= -1.0;
      }
      out.basis = std::move(q);
    }
  } else {
    const Eigendecomposition e = sym_eigendecompose(sample_covariance(x));
    out.rank_tolerance = default_rank_tolerance(e.eigenvalues(0), n, d);
    Index r = 0;
    while (r < e.eigenvalues.size() && e.eigenvalues(r) > out.rank_tolerance) ++r;
    out.eigenvalues = e.eigenvalues.head(r);
    out.basis = e.eigenvectors.leftCols(r);
  }
  return out;
}

}  // namespace ddlab::linalg
