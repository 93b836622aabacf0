#pragma once

#include "ddlab/linalg.hpp"
#include "ddlab/rng.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace ddlab {

enum class InputDistribution {
  truncated_normal_ball,
  unit_sphere,
  isotropic_rademacher,
  isotropic_gaussian,
};

enum class IsotropicKind { rademacher, gaussian };

std::string_view to_string(InputDistribution dist);
InputDistribution parse_input_distribution(std::string_view name);

/// Regression problem Y = X^T w_star + sigma * N(0, 1).
struct ProblemSpec {
  Index n = 1;
  Index d = 1;
  InputDistribution input_dist = InputDistribution::truncated_normal_ball;
  Vector w_star;
  double sigma = 0.0;

  /// Throws InvalidArgument unless n, d >= 1, sigma >= 0 and w_star has d entries.
  void validate() const;
};

/// Rows of `instances` are observations.
struct Dataset {
  Matrix instances;
  Vector labels;
  Vector clean_labels;
  double sigma = 0.0;

  Index n() const { return instances.rows(); }
  Index d() const { return instances.cols(); }
};

/// Coordinates i.i.d. N(0,1) truncated to [-1, 1], each row scaled by 1/sqrt(d).
Matrix sample_truncated_normal_ball(Index n, Index d, Rng& rng);

/// Rows uniform on the unit sphere (normalized Gaussians).
Matrix sample_unit_sphere(Index n, Index d, Rng& rng);

/// Rows with identity covariance. Rademacher rows have norm exactly sqrt(d).
Matrix sample_isotropic(Index n, Index d, IsotropicKind kind, Rng& rng);

Matrix sample_inputs(InputDistribution dist, Index n, Index d, Rng& rng);

Dataset make_regression_dataset(const ProblemSpec& spec, Rng& rng);

/// A random direction scaled to `target_norm`.
Vector fixed_wstar(Index d, double target_norm, Rng& rng);

/// The first d coordinates of a master vector of length d_max drawn from
/// `master_seed`, rescaled to `target_norm`. Keeps the target fixed across a
/// dimension sweep.
Vector sweep_wstar(Index d, Index d_max, double target_norm, std::uint64_t master_seed);

/// Variance of N(0,1) truncated to [-1, 1]: 1 - 2 phi(1) / (2 Phi(1) - 1).
double truncated_normal_variance();

/// E[X X^T] for each distribution.
Matrix population_covariance(InputDistribution dist, Index d);

/// Smallest positive eigenvalue of the population covariance.
double population_lambda_min_plus(InputDistribution dist, Index d);

/// Sub-Gaussian norm bound K where it is known analytically (isotropic kinds).
std::optional<double> analytic_subgaussian_constant(InputDistribution dist);

/// True for distributions whose rows satisfy ||x|| <= 1.
bool is_ball_constrained(InputDistribution dist);

}  // namespace ddlab
