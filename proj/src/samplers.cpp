#include "ddlab/samplers.hpp"

#include "ddlab/error.hpp"

#include <cmath>
#include <numbers>

namespace ddlab {

namespace {

void require_dims(Index n, Index d, const char* what) {
  if (n < 1 || d < 1) {
    throw InvalidArgument(std::string(what) + ": n and d must be >= 1");
  }
}

double truncated_standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  for (;;) {
    const double z = dist(rng);
    if (z >= -1.0 && z <= 1.0) return z;
  }
}

}  // namespace

std::string_view to_string(InputDistribution dist) {
  switch (dist) {
    case InputDistribution::truncated_normal_ball: return "truncated_normal_ball";
    case InputDistribution::unit_sphere: return "unit_sphere";
    case InputDistribution::isotropic_rademacher: return "isotropic_rademacher";
    case InputDistribution::isotropic_gaussian: return "isotropic_gaussian";
  }
  return "unknown";
}

InputDistribution parse_input_distribution(std::string_view name) {
  for (auto d : {InputDistribution::truncated_normal_ball, InputDistribution::unit_sphere,
                 InputDistribution::isotropic_rademacher, InputDistribution::isotropic_gaussian}) {
    if (name == to_string(d)) return d;
  }
  throw InvalidArgument("unknown input distribution '" + std::string(name) + "'");
}

void ProblemSpec::validate() const {
  if (n < 1 || d < 1) throw InvalidArgument("ProblemSpec: n and d must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("ProblemSpec: sigma must be >= 0");
  if (w_star.size() != d) throw InvalidArgument("ProblemSpec: w_star must have d entries");
  if (!w_star.allFinite()) throw InvalidArgument("ProblemSpec: w_star has non-finite entries");
}

Matrix sample_truncated_normal_ball(Index n, Index d, Rng& rng) {
  require_dims(n, d, "sample_truncated_normal_ball");
  Matrix x(n, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = truncated_standard_normal(rng) * scale;
  }
  return x;
}

Matrix sample_unit_sphere(Index n, Index d, Rng& rng) {
  require_dims(n, d, "sample_unit_sphere");
  Matrix x(n, d);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    double norm = 0.0;
    do {
      for (Index j = 0; j < d; ++j) x(i, j) = dist(rng);
      norm = x.row(i).norm();
    } while (norm == 0.0);
    x.row(i) /= norm;
  }
  return x;
}

Matrix sample_isotropic(Index n, Index d, IsotropicKind kind, Rng& rng) {
  require_dims(n, d, "sample_isotropic");
  Matrix x(n, d);
  if (kind == IsotropicKind::rademacher) {
    std::bernoulli_distribution coin(0.5);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) x(i, j) = coin(rng) ? 1.0 : -1.0;
    }
  } else {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) x(i, j) = dist(rng);
    }
  }
  return x;
}

Matrix sample_inputs(InputDistribution dist, Index n, Index d, Rng& rng) {
  switch (dist) {
    case InputDistribution::truncated_normal_ball: return sample_truncated_normal_ball(n, d, rng);
    case InputDistribution::unit_sphere: return sample_unit_sphere(n, d, rng);
    case InputDistribution::isotropic_rademacher: return sample_isotropic(n, d, IsotropicKind::rademacher, rng);
    case InputDistribution::isotropic_gaussian: return sample_isotropic(n, d, IsotropicKind::gaussian, rng);
  }
  throw InvalidArgument("sample_inputs: unknown distribution");
}

Dataset make_regression_dataset(const ProblemSpec& spec, Rng& rng) {
  spec.validate();
  Dataset ds;
  ds.instances = sample_inputs(spec.input_dist, spec.n, spec.d, rng);
  ds.clean_labels = ds.instances * spec.w_star;
  ds.labels = ds.clean_labels;
  ds.sigma = spec.sigma;
  if (spec.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Index i = 0; i < spec.n; ++i) ds.labels(i) += spec.sigma * noise(rng);
  }
  return ds;
}

Vector fixed_wstar(Index d, double target_norm, Rng& rng) {
  if (d < 1) throw InvalidArgument("fixed_wstar: d must be >= 1");
  if (!(target_norm >= 0.0)) throw InvalidArgument("fixed_wstar: target_norm must be >= 0");
  Vector w(d);
  if (target_norm == 0.0) {
    w.setZero();
    return w;
  }
  std::normal_distribution<double> dist(0.0, 1.0);
  do {
    for (Index j = 0; j < d; ++j) w(j) = dist(rng);
  } while (w.norm() == 0.0);
  return w * (target_norm / w.norm());
}

Vector sweep_wstar(Index d, Index d_max, double target_norm, std::uint64_t master_seed) {
  if (d < 1 || d > d_max) throw InvalidArgument("sweep_wstar: need 1 <= d <= d_max");
  if (!(target_norm >= 0.0)) throw InvalidArgument("sweep_wstar: target_norm must be >= 0");
  Rng rng = make_rng(master_seed, {hash_string("wstar")});
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector master(d_max);
  for (Index j = 0; j < d_max; ++j) master(j) = dist(rng);
  Vector w = master.head(d);
  const double norm = w.norm();
  if (target_norm == 0.0 || norm == 0.0) return Vector::Zero(d);
  return w * (target_norm / norm);
}

double truncated_normal_variance() {
  const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
  const double mass = std::erf(1.0 / std::numbers::sqrt2);  // 2 Phi(1) - 1
  return 1.0 - 2.0 * phi1 / mass;
}

Matrix population_covariance(InputDistribution dist, Index d) {
  if (d < 1) throw InvalidArgument("population_covariance: d must be >= 1");
  const double dd = static_cast<double>(d);
  switch (dist) {
    case InputDistribution::truncated_normal_ball:
      return Matrix::Identity(d, d) * (truncated_normal_variance() / dd);
    case InputDistribution::unit_sphere: return Matrix::Identity(d, d) / dd;
    case InputDistribution::isotropic_rademacher:
    case InputDistribution::isotropic_gaussian: return Matrix::Identity(d, d);
  }
  throw InvalidArgument("population_covariance: unknown distribution");
}

double population_lambda_min_plus(InputDistribution dist, Index d) {
  return population_covariance(dist, 1)(0, 0) / (dist == InputDistribution::isotropic_gaussian ||
                                                         dist == InputDistribution::isotropic_rademacher
                                                     ? 1.0
                                                     : static_cast<double>(d));
}

std::optional<double> analytic_subgaussian_constant(InputDistribution dist) {
  switch (dist) {
    case InputDistribution::isotropic_rademacher:
    case InputDistribution::isotropic_gaussian: return 1.0;
    default: return std::nullopt;
  }
}

bool is_ball_constrained(InputDistribution dist) {
  return dist == InputDistribution::truncated_normal_ball || dist == InputDistribution::unit_sphere;
}

}  // namespace ddlab
