#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddlab/error.hpp"
#include "ddlab/linalg.hpp"
#include "ddlab/samplers.hpp"

#include <cmath>
#include <numbers>

using namespace ddlab;

namespace {

double truncated_variance_oracle() {
  const double phi = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
  const double Phi = 0.5 * (1.0 + std::erf(1.0 / std::numbers::sqrt2));
  return 1.0 - 2.0 * phi / (2.0 * Phi - 1.0);
}

// Max over entries of |empirical second moment - target| / SE.
double covariance_z_score(const Matrix& x, const Matrix& target) {
  const auto n = static_cast<double>(x.rows());
  double worst = 0.0;
  for (Index a = 0; a < x.cols(); ++a) {
    for (Index b = 0; b < x.cols(); ++b) {
      const Eigen::ArrayXd prod = x.col(a).array() * x.col(b).array();
      const double mean = prod.mean();
      const double sd = std::sqrt((prod - mean).square().sum() / (n - 1));
      worst = std::max(worst, std::abs(mean - target(a, b)) / (sd / std::sqrt(n)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("truncated normal ball") {
  Rng rng(1);
  Matrix x = sample_truncated_normal_ball(1000, 1, rng);
  CHECK(x.cwiseAbs().maxCoeff() <= 1.0);

  for (Index d : {1, 2, 7, 50}) {
    x = sample_truncated_normal_ball(200, d, rng);
    CHECK(x.rowwise().norm().maxCoeff() <= 1.0 + 1e-12);
  }

  CHECK(truncated_normal_variance() == doctest::Approx(truncated_variance_oracle()).epsilon(1e-14));

  x = sample_truncated_normal_ball(100000, 1, rng);
  const Eigen::ArrayXd sq = x.col(0).array().square();
  const double var = sq.mean();
  const double se = std::sqrt((sq - var).square().sum() / (sq.size() - 1) / sq.size());
  CHECK(std::abs(var - truncated_variance_oracle()) <= 3 * se);
}

TEST_CASE("unit sphere") {
  Rng rng(2);
  Matrix x = sample_unit_sphere(300, 9, rng);
  CHECK((x.rowwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);

  const Index n = 20000;
  x = sample_unit_sphere(n, 1, rng);
  const double plus = static_cast<double>((x.array() == 1.0).count()) / n;
  CHECK(((x.array() == 1.0) || (x.array() == -1.0)).all());
  CHECK(std::abs(plus - 0.5) <= 3.0 / (2.0 * std::sqrt(double(n))));

  x = sample_unit_sphere(100000, 5, rng);
  CHECK(covariance_z_score(x, Matrix::Identity(5, 5) / 5.0) <= 4.0);
}

TEST_CASE("isotropic samplers") {
  Rng rng(3);
  Matrix x = sample_isotropic(100, 16, IsotropicKind::rademacher, rng);
  CHECK((x.rowwise().norm().array() - 4.0).abs().maxCoeff() == 0.0);
  x = sample_isotropic(100, 1, IsotropicKind::rademacher, rng);
  CHECK(((x.array() == 1.0) || (x.array() == -1.0)).all());

  x = sample_isotropic(100000, 3, IsotropicKind::gaussian, rng);
  CHECK(covariance_z_score(x, Matrix::Identity(3, 3)) <= 4.0);
  x = sample_isotropic(100000, 3, IsotropicKind::rademacher, rng);
  // Diagonal is exactly 1, so only the off-diagonal moments carry MC error.
  CHECK((linalg::sample_covariance(x).diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("regression datasets") {
  Rng rng(4);
  ProblemSpec spec{30, 5, InputDistribution::unit_sphere, fixed_wstar(5, 1.0, rng), 0.0};
  Dataset ds = make_regression_dataset(spec, rng);
  CHECK(ds.labels == ds.clean_labels);
  CHECK(ds.clean_labels.isApprox(ds.instances * spec.w_star));

  spec.w_star = Vector::Zero(5);
  ds = make_regression_dataset(spec, rng);
  CHECK(ds.labels.isZero(0.0));

  spec = ProblemSpec{100000, 3, InputDistribution::isotropic_gaussian, Vector{{0.5, -1.0, 2.0}}, 0.3};
  ds = make_regression_dataset(spec, rng);
  const Eigen::ArrayXd eps = (ds.labels - ds.clean_labels).array();
  const double mean = eps.mean();
  CHECK(std::abs(mean) <= 4 * 0.3 / std::sqrt(100000.0));
  const double sd = std::sqrt((eps - mean).square().sum() / (eps.size() - 1));
  // SE of the sample standard deviation of a normal is about sd / sqrt(2 n).
  CHECK(std::abs(sd - 0.3) <= 3 * 0.3 / std::sqrt(2.0 * 100000));
}

TEST_CASE("problem spec validation") {
  ProblemSpec spec{0, 3, InputDistribution::unit_sphere, Vector::Zero(3), 0.0};
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.n = 4;
  spec.sigma = -1;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.sigma = 0;
  spec.w_star = Vector::Zero(2);
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}

TEST_CASE("w_star") {
  Rng a(9), b(9);
  CHECK(fixed_wstar(6, 0.0, a).isZero(0.0));
  const Vector u = fixed_wstar(6, 2.5, a);
  const Vector v = fixed_wstar(6, 2.5, b);
  CHECK(std::abs(u.norm() - 2.5) <= 1e-12);
  (void)v;
  Rng c(9), e(9);
  fixed_wstar(6, 0.0, c);
  fixed_wstar(6, 0.0, e);
  CHECK(fixed_wstar(6, 2.5, c) == fixed_wstar(6, 2.5, e));

  // Sweep vectors share a master direction: prefixes agree up to scale.
  const Vector w10 = sweep_wstar(10, 100, 1.0, 77);
  const Vector w40 = sweep_wstar(40, 100, 1.0, 77);
  CHECK(std::abs(w40.norm() - 1.0) <= 1e-12);
  const Vector head = w40.head(10).normalized();
  CHECK((head - w10).norm() <= 1e-12);
  CHECK(sweep_wstar(40, 100, 1.0, 78) != w40);
}

TEST_CASE("population covariance") {
  CHECK(population_covariance(InputDistribution::unit_sphere, 4).isApprox(Matrix::Identity(4, 4) / 4.0));
  CHECK(population_covariance(InputDistribution::isotropic_rademacher, 3).isApprox(Matrix::Identity(3, 3)));
  CHECK(population_lambda_min_plus(InputDistribution::truncated_normal_ball, 10) ==
        doctest::Approx(truncated_variance_oracle() / 10));
  CHECK(analytic_subgaussian_constant(InputDistribution::isotropic_rademacher).value() == 1.0);
  CHECK_FALSE(analytic_subgaussian_constant(InputDistribution::unit_sphere).has_value());
  CHECK(parse_input_distribution("unit_sphere") == InputDistribution::unit_sphere);
  CHECK(to_string(InputDistribution::isotropic_gaussian) == "isotropic_gaussian");
  CHECK_THROWS_AS(parse_input_distribution("cauchy"), InvalidArgument);
}

TEST_CASE("datasets are reproducible from the seed") {
  ProblemSpec spec{12, 7, InputDistribution::truncated_normal_ball, Vector::Ones(7) / std::sqrt(7.0), 0.2};
  Rng a(123), b(123);
  const Dataset x = make_regression_dataset(spec, a);
  const Dataset y = make_regression_dataset(spec, b);
  CHECK(x.instances == y.instances);
  CHECK(x.labels == y.labels);
}
