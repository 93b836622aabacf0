#pragma once

#include "ddlab/gd.hpp"
#include "ddlab/linalg.hpp"
#include "ddlab/risk.hpp"
#include "ddlab/samplers.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ddlab {

struct McTerm {
  double value = 0.0;
  double std_error = 0.0;
};

/// The three terms of the GD excess-risk bound for least squares:
///
///   E[(1 - a l)^{2T}] (||w*||^2 + nu^2 (2 + d))      optimization
///   + (4 sigma^2 / n) E[l^{-2}]                        noise
///   + 1/2 E||w*||^2_{I - M}                            complement
///
/// with l the smallest positive eigenvalue of the sample covariance and M the
/// projector onto its range. Expectations are Monte Carlo over datasets.
struct BoundReport {
  McTerm optimization;
  McTerm noise;
  McTerm complement;
  double total = 0.0;
  /// Standard error of the per-draw total.
  double total_std_error = 0.0;
  /// Draws whose smallest positive eigenvalue fell below the rank tolerance
  /// and were left out of the noise average.
  std::int64_t excluded_trials = 0;
  double lambda_min_plus_mean = 0.0;
  std::vector<std::string> warnings;

  struct Metadata {
    Index n = 0;
    Index d = 0;
    double alpha = 0.0;
    std::int64_t T = 0;
    double init_variance = 0.0;
    double sigma = 0.0;
    std::int64_t n_sample_draws = 0;
  } metadata;
};

/// Noiseless bound; requires spec.sigma == 0.
BoundReport bound_noiseless(const ProblemSpec& spec, const GdConfig& cfg, std::int64_t n_sample_draws,
                            std::uint64_t seed);

/// Bound with label noise; requires spec.sigma > 0.
BoundReport bound_noisy(const ProblemSpec& spec, const GdConfig& cfg, std::int64_t n_sample_draws,
                        std::uint64_t seed);

/// Bound report for several horizons sharing the same dataset draws. Works
/// for any sigma >= 0 (the noise term is zero when sigma == 0).
std::vector<BoundReport> bound_reports(const ProblemSpec& spec, double alpha, double init_variance,
                                       std::span<const std::int64_t> horizons, std::int64_t n_sample_draws,
                                       std::uint64_t seed);

/// Noise term (4 sigma^2 / n) l^{-2} for a single dataset.
double noise_term(double sigma, Index n, double lambda_min_plus);

/// Absolute constant 2^{3.5} sqrt(ln 9) of the non-asymptotic Bai-Yin bound.
double bai_yin_constant();

/// High-probability lower bound on the smallest positive eigenvalue of the
/// sample covariance of n i.i.d. sub-Gaussian vectors with norm bound K:
///   n >= d:  l(S) (1 - K^2 (c sqrt(d/n) + sqrt(x/n)))_+^2
///   n <  d:  l(S) (sqrt(d/n) - K^2 (c + 6 sqrt(x/n)))_+^2
double bai_yin_lower_bound(double lambda_min_plus_pop, double K, Index n, Index d, double x);

struct ConcentrationReport {
  std::int64_t violations = 0;
  std::int64_t trials = 0;
  double rate = 0.0;
  double allowed = 0.0;      // 2 e^{-x}
  double slack_limit = 0.0;  // allowed + 3 sqrt(allowed / trials)
  double lower_bound = 0.0;
  double lambda_min_plus_mean = 0.0;
  bool within_limit = true;
};

/// Fraction of draws whose sample covariance falls below bai_yin_lower_bound.
/// For n < d the rows must have norm exactly sqrt(d) (rademacher).
ConcentrationReport concentration_violation_rate(InputDistribution dist, Index n, Index d, double x, double K,
                                                 std::int64_t trials, std::uint64_t seed);

struct AsymptoticFactor {
  double value = 1.0;
  double inner = 1.0;
  std::string warning;
};

/// (1 - (a/n) (sqrt(d) - sqrt(n) - 1)_+^2)^{2T} for d > n, with d and n
/// swapped inside the clamp for d < n.
AsymptoticFactor asymptotic_optimization_factor(double alpha, Index n, Index d, std::int64_t T);

struct TailProjectionBound {
  double min_term = 0.0;
  double confidence_term = 0.0;
  double total = 0.0;
  Index argmin_k = 0;
};

/// min_{k in [rank]} { tail_k / n + (1 + sqrt k) sqrt(2/n) } + ||w*||^2 sqrt((18/n) ln(2n/delta)).
TailProjectionBound tail_projection_bound(const linalg::SpectrumSummary& spectrum, double wstar_norm, Index n,
                                          double delta);

}  // namespace ddlab
