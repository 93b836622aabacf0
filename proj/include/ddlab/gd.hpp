#pragma once

#include "ddlab/linalg.hpp"
#include "ddlab/rng.hpp"
#include "ddlab/samplers.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ddlab {

/// Full-batch gradient descent on L(w) = (1/2n) sum_i (w^T x_i - y_i)^2.
struct GdConfig {
  double alpha = 0.05;
  std::int64_t T = 0;
  double init_variance = 0.0;

  void validate() const;
};

struct GdTrace {
  /// w_0, w_stride, w_2*stride, ... and always w_T.
  std::vector<Vector> iterates;
  std::vector<std::int64_t> iterate_steps;
  std::int64_t stride = 1;
  /// ||grad L(w_t)||^2 for t = 0..T-1.
  std::vector<double> grad_sq_norms;
  /// L(w_t) for t = 0..T.
  std::vector<double> empirical_losses;
  Vector final;
  /// L(0) = |y|^2 / (2n), the scale of rounding in the stored losses.
  double label_loss = 0.0;
};

/// Iterates stored in full while n * d * T stays below this many scalars.
inline constexpr std::int64_t kFullTraceBudget = 10'000'000;

GdTrace gd_iterate(const Matrix& x, const Vector& y, const Vector& w0, const GdConfig& cfg);
GdTrace gd_iterate(const Dataset& dataset, const Vector& w0, const GdConfig& cfg);

/// w_T = (I - a S)^T w0 + a sum_{t<T} (I - a S)^t c, evaluated through the
/// eigendecomposition of S.
Vector gd_closed_form(const Matrix& sigma_hat, const Vector& c, const Vector& w0, const GdConfig& cfg);

/// C = X^T y / n.
Vector gd_target_vector(const Matrix& x, const Vector& y);

/// The T-step GD map restricted to the data subspace. Directions outside the
/// range of the sample covariance are left untouched, which is exact for
/// least squares because C lies in that range.
class SpectralGdMap {
 public:
  SpectralGdMap(linalg::RangeBasis range, const Vector& c);

  Vector apply(const Vector& w0, double alpha, std::int64_t T) const;

  const linalg::RangeBasis& range() const { return range_; }

 private:
  linalg::RangeBasis range_;
  Vector c_coords_;  // U^T c
};

/// Largest eigenvalue of the sample covariance: the smoothness constant H.
double smoothness_constant(const Matrix& x);

struct AdmissibilityReport {
  double max_ratio = 0.0;
  std::int64_t violations = 0;
  std::int64_t trials = 0;
  double contraction = 1.0;  // (1 - alpha lambda_min_plus)^T
};

/// Checks ||A(w0) - A(u0)||_M <= (1 - alpha lambda_min_plus)^T ||w0 - u0||
/// on `trials` random pairs of standard normal starting points.
AdmissibilityReport check_admissibility(const Dataset& dataset, const GdConfig& cfg, std::int64_t trials, Rng& rng);

struct DescentLemmaReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

/// sum_t ||grad L(w_t)||^2 <= (2 / alpha) (L(w_0) - L(w_T)). Requires alpha <= 1/H.
DescentLemmaReport check_descent_lemma(const GdTrace& trace, double alpha, double H);

struct NoiseCouplingReport {
  /// ||w_t - w~_t||_M for t = 0..T (noisy vs clean labels, both from w_star).
  std::vector<double> coupled_gap;
  /// b_0 = 0, b_{t+1} = (1 - alpha lambda_min_plus) b_t + (alpha/n) ||sum_i x_i eps_i||_M.
  std::vector<double> recursion_bound;
  double noise_drive = 0.0;  // (alpha/n) ||sum_i x_i eps_i||_M
  std::string notice;
};

NoiseCouplingReport noise_coupling_gap(const Dataset& dataset, const Vector& wstar, const GdConfig& cfg);

}  // namespace ddlab
