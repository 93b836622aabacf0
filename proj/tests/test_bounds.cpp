#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddlab/bounds.hpp"
#include "ddlab/error.hpp"
#include "ddlab/linalg.hpp"

#include <cmath>

using namespace ddlab;

TEST_CASE("noiseless bound") {
  Rng rng(1);
  ProblemSpec spec{40, 6, InputDistribution::unit_sphere, fixed_wstar(6, 1.0, rng), 0.0};
  auto b = bound_noiseless(spec, GdConfig{0.5, 0, 0.1}, 4, 1);
  CHECK(b.optimization.value == doctest::Approx(1.0 + 0.1 * 8));
  CHECK(b.complement.value <= 1e-20);
  CHECK(b.noise.value == 0.0);
  CHECK(b.total == doctest::Approx(b.optimization.value + b.noise.value + b.complement.value).epsilon(1e-12));
  CHECK(b.metadata.n == 40);

  spec.sigma = 0.1;
  CHECK_THROWS_AS(bound_noiseless(spec, GdConfig{0.5, 0, 0.1}, 4, 1), InvalidArgument);
}

TEST_CASE("complement term in the overparameterized regime") {
  Rng rng(2);
  ProblemSpec spec{5, 30, InputDistribution::unit_sphere, fixed_wstar(30, 1.0, rng), 0.0};
  const auto b = bound_noiseless(spec, GdConfig{0.5, 100, 0.0}, 200, 2);
  // E |(I - M) w|^2 = (d - n)/d for a fixed unit w and a uniformly random n-plane.
  CHECK(std::abs(b.complement.value - 0.5 * 25.0 / 30.0) <= 4 * b.complement.std_error);
}

TEST_CASE("optimization term does not increase with T") {
  Rng rng(3);
  ProblemSpec spec{15, 20, InputDistribution::truncated_normal_ball, fixed_wstar(20, 1.0, rng), 0.0};
  const std::vector<std::int64_t> hs{0, 1, 10, 100, 1000};
  const auto reports = bound_reports(spec, 1.0, 0.05, hs, 10, 3);
  for (std::size_t i = 1; i < reports.size(); ++i)
    CHECK(reports[i].optimization.value <= reports[i - 1].optimization.value);
}

TEST_CASE("noise term") {
  CHECK(noise_term(1.0, 2, 0.125) == doctest::Approx(128.0));
  CHECK(noise_term(0.0, 2, 0.125) == 0.0);

  Rng rng(4);
  ProblemSpec spec{25, 10, InputDistribution::unit_sphere, fixed_wstar(10, 1.0, rng), 0.1};
  const auto low = bound_noisy(spec, GdConfig{0.5, 100, 0.1}, 8, 5);
  spec.sigma = 0.5;
  const auto high = bound_noisy(spec, GdConfig{0.5, 100, 0.1}, 8, 5);
  CHECK(high.noise.value == doctest::Approx(25 * low.noise.value).epsilon(1e-12));
  CHECK(high.total > low.total);
  spec.sigma = 0.0;
  CHECK_THROWS_AS(bound_noisy(spec, GdConfig{0.5, 100, 0.1}, 8, 5), InvalidArgument);
}

TEST_CASE("Bai-Yin lower bound") {
  const double c = std::pow(2.0, 3.5) * std::sqrt(std::log(9.0));
  CHECK(bai_yin_constant() == doctest::Approx(c));
  CHECK(c == doctest::Approx(16.77).epsilon(1e-3));
  CHECK(bai_yin_lower_bound(1.0, 1.0, 50, 50, 100.0) == 0.0);
  CHECK(bai_yin_lower_bound(1.0, 1.0, 10000, 100, 1.0) == 0.0);
  // Large aspect ratio in the n < d branch: (sqrt(d/n) - (c + 6 sqrt(x/n)))^2.
  const double v = bai_yin_lower_bound(1.0, 1.0, 1, 10000, 0.0);
  CHECK(v == doctest::Approx(std::pow(100.0 - c, 2)));
  CHECK(bai_yin_lower_bound(1.0, 1.0, 1, 40000, 0.0) > v);
  // Small K makes the n >= d branch non-vacuous.
  const double k = 0.1;
  CHECK(bai_yin_lower_bound(2.0, k, 400, 4, 1.0) ==
        doctest::Approx(2.0 * std::pow(1 - k * k * (c * 0.1 + 0.05), 2)));
}

TEST_CASE("concentration violations") {
  const auto r = concentration_violation_rate(InputDistribution::isotropic_rademacher, 400, 20, 2.0, 1.0, 50, 7);
  CHECK(r.lower_bound == 0.0);
  CHECK(r.violations == 0);
  CHECK(r.allowed == doctest::Approx(2 * std::exp(-2.0)));
  CHECK(r.within_limit);
  CHECK_THROWS_AS(concentration_violation_rate(InputDistribution::unit_sphere, 40, 20, 1.0, 1.0, 5, 1),
                  InvalidArgument);
  CHECK_THROWS_AS(concentration_violation_rate(InputDistribution::isotropic_gaussian, 20, 40, 1.0, 1.0, 5, 1),
                  InvalidArgument);
}

TEST_CASE("asymptotic factor") {
  CHECK(asymptotic_optimization_factor(0.05, 20, 20, 1000).value == 1.0);
  CHECK(asymptotic_optimization_factor(0.05, 20, 80, 0).value == 1.0);
  double prev = 1.0;
  for (Index d = 30; d <= 400; d += 10) {
    const double v = asymptotic_optimization_factor(0.05, 20, d, 1000).value;
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    prev = v;
  }
  const double inner = std::pow(std::sqrt(80.0) - std::sqrt(20.0) - 1, 2);
  CHECK(asymptotic_optimization_factor(0.05, 20, 80, 3).value ==
        doctest::Approx(std::pow(1 - 0.05 / 20 * inner, 6)));
  // Underparameterized: n and d swap inside the clamp.
  CHECK(asymptotic_optimization_factor(0.05, 80, 20, 3).value ==
        doctest::Approx(std::pow(1 - 0.05 / 80 * inner, 6)));
  CHECK_FALSE(asymptotic_optimization_factor(10.0, 4, 400, 3).warning.empty());
}

TEST_CASE("tail projection bound") {
  const double n = 4;
  auto s = linalg::spectrum_summary(Vector{{1.0, 0.0, 0.0}}, 1e-12);
  auto b = tail_projection_bound(s, 1.0, 4, 0.05);
  CHECK(b.min_term == doctest::Approx(2.0 * std::sqrt(2.0 / n)));
  CHECK(b.argmin_k == 1);
  CHECK(b.confidence_term == doctest::Approx(std::sqrt(18.0 / n * std::log(2 * n / 0.05))));
  CHECK(b.total == doctest::Approx(b.min_term + b.confidence_term));

  s = linalg::spectrum_summary(Vector{{1.0, 0.5, 0.25}}, 1e-12);
  b = tail_projection_bound(s, 2.0, 4, 0.05);
  const double k1 = 3.0 / 16 + 2 * std::sqrt(0.5);
  CHECK(b.min_term <= k1);
  CHECK(b.argmin_k == 1);
  CHECK(b.min_term == doctest::Approx(k1));
  CHECK(b.confidence_term == doctest::Approx(4.0 * std::sqrt(18.0 / n * std::log(2 * n / 0.05))));
  CHECK_THROWS_AS(tail_projection_bound(s, 1.0, 4, 1.5), InvalidArgument);
}
