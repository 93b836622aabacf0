#pragma once

#include "ddlab/gd.hpp"
#include "ddlab/linalg.hpp"
#include "ddlab/samplers.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ddlab {

/// Monte Carlo mean with its standard error (sample std / sqrt(n_trials)).
struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_trials = 0;
  std::map<std::string, double> components;
  std::vector<std::string> warnings;
};

/// Mean and standard error of `values`, summed in index order.
RiskEstimate summarize(std::span<const double> values);

/// How the population risk of a parameter vector is obtained.
struct RiskEvaluation {
  std::optional<Matrix> population_cov;
  Index holdout_size = 0;

  static RiskEvaluation analytic(InputDistribution dist, Index d) {
    return RiskEvaluation{population_covariance(dist, d), 0};
  }
  static RiskEvaluation holdout(Index size) { return RiskEvaluation{std::nullopt, size}; }
};

/// L(w) = 1/2 (w - w*)^T S (w - w*) + sigma^2 / 2.
double population_risk(const Vector& w, const Matrix& population_cov, const Vector& wstar, double sigma);

/// (1/2n) sum_i (w^T x_i - y_i)^2.
double empirical_risk(const Vector& w, const Matrix& x, const Vector& y);
double empirical_risk(const Vector& w, const Dataset& dataset);

/// Dataset number `draw` of a Monte Carlo run seeded with `seed`. Every MC
/// estimator in the library draws its samples through this function, so two
/// estimators given the same seed see the same datasets.
Dataset mc_dataset(const ProblemSpec& spec, std::uint64_t seed, std::int64_t draw);

/// Excess risk L(A_S(W_0)) - L(w*) of T-step GD from W_0 ~ N(0, nu^2 I),
/// averaged over `n_init_draws` initializations per dataset and then over
/// `n_sample_draws` datasets. Trials for the standard error are datasets.
RiskEstimate excess_risk_mc(const ProblemSpec& spec, const GdConfig& cfg, std::int64_t n_sample_draws,
                            std::int64_t n_init_draws, std::uint64_t seed, const RiskEvaluation& eval);

/// Same estimator for several horizons at once, sharing datasets and initializations.
std::vector<RiskEstimate> excess_risk_mc(const ProblemSpec& spec, double alpha, double init_variance,
                                         std::span<const std::int64_t> horizons, std::int64_t n_sample_draws,
                                         std::int64_t n_init_draws, std::uint64_t seed,
                                         const RiskEvaluation& eval);

/// E[(1 - alpha lambda_min_plus)^{2T}] * (||w*||^2 + nu^2 (2 + d)), the
/// optimization-error term of the noiseless excess-risk bound.
RiskEstimate optimization_error_mc(const ProblemSpec& spec, const GdConfig& cfg, std::int64_t n_sample_draws,
                                   std::uint64_t seed);

std::vector<RiskEstimate> optimization_error_mc(const ProblemSpec& spec, double alpha, double init_variance,
                                                std::span<const std::int64_t> horizons,
                                                std::int64_t n_sample_draws, std::uint64_t seed);

/// Coefficient ||w*||^2 + nu^2 (2 + d) multiplying the contraction factor in the bound.
double bound_init_coefficient(double wstar_sq_norm, double init_variance, Index d);

struct GaussianNormReport {
  double empirical = 0.0;
  double std_error = 0.0;
  double bound_formula = 0.0;  // ||x0||^2 + nu^2 (2 + d)
  double exact_formula = 0.0;  // ||x0||^2 + nu^2 d
  bool matches_bound = false;
  bool matches_exact = false;
};

/// Monte Carlo check of E||W - x0||^2 for W ~ N(0, nu^2 I).
GaussianNormReport gaussian_norm_identity_oracle(double nu, const Vector& x0, std::int64_t n_samples,
                                                 std::uint64_t seed);

}  // namespace ddlab
