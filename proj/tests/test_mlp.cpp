#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddlab/error.hpp"
#include "ddlab/mlp.hpp"
#include "gradient_check.hpp"

#include <cmath>

using namespace ddlab;

namespace {

ImageSet toy_images(Index n, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageSet set;
  set.rows = 1;
  set.cols = dim;
  set.images.resize(n, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < n; ++i) set.images(i, j) = u(rng);
  for (Index i = 0; i < n; ++i) set.labels.push_back(static_cast<int>(rng() % 10));
  return set;
}

MlpParams zero_params(Index input, std::vector<Index> widths, bool skip) {
  Rng rng(0);
  MlpParams p = init_mlp(input, widths, 10, skip, rng);
  for (auto& l : p.layers) {
    l.weights.setZero();
    l.bias.setZero();
  }
  return p;
}

}  // namespace

TEST_CASE("forward pass by hand") {
  MlpParams p = zero_params(3, {2}, false);
  CHECK(mlp_forward(p, Matrix::Random(5, 3)).output.isZero(0.0));

  // One input, width 2: h = relu((x, -x) + (0, 0.5)), output_k = sum_j h_j + k.
  p = zero_params(1, {2}, false);
  p.layers[0].weights << 1.0, -1.0;
  p.layers[0].bias << 0.0, 0.5;
  p.layers[1].weights.setOnes();
  for (Index k = 0; k < 10; ++k) p.layers[1].bias(k) = static_cast<double>(k);
  const ForwardPass f = mlp_forward(p, Matrix{{0.25}, {-2.0}});
  CHECK(f.activations[0](0, 0) == 0.25);
  CHECK(f.activations[0](0, 1) == 0.25);
  CHECK(f.activations[0](1, 0) == 0.0);
  CHECK(f.activations[0](1, 1) == 2.5);
  CHECK(f.output(0, 3) == doctest::Approx(3.5));
  CHECK(f.output(1, 9) == doctest::Approx(11.5));
}

TEST_CASE("skip connections carry activations through dead layers") {
  MlpParams p = zero_params(2, {2, 2, 2}, true);
  p.layers[0].weights.setIdentity();
  p.layers[3].weights.setZero();
  p.layers[3].weights(0, 0) = 1.0;
  p.layers[3].weights(1, 1) = 1.0;
  const ForwardPass f = mlp_forward(p, Matrix{{0.3, 0.7}});
  CHECK(f.activations[2](0, 0) == 0.3);
  CHECK(f.activations[2](0, 1) == 0.7);
  CHECK(f.output(0, 0) == 0.3);
  CHECK(f.output(0, 1) == 0.7);

  const MlpParams no_skip = [&] {
    MlpParams q = p;
    q.skip_connections = false;
    return q;
  }();
  CHECK(mlp_forward(no_skip, Matrix{{0.3, 0.7}}).output.isZero(0.0));
}

TEST_CASE("loss and gradient") {
  MlpParams p = zero_params(3, {4}, false);
  const Matrix t = one_hot({1, 2});
  CHECK(mlp_loss(p, Matrix::Random(2, 3), t) == doctest::Approx(0.5));

  for (bool skip : {false, true}) {
    const auto toy = testing::gradient_toy(skip, 42);
    const auto r = testing::check_gradient(toy.params, toy.inputs, toy.targets);
    CHECK(r.parameters == toy.params.parameter_count());
    CHECK(r.max_rel_error <= 1e-5);
  }
}

TEST_CASE("initialization") {
  Rng rng(3);
  const std::vector<Index> widths{300};
  const MlpParams p = init_mlp(400, widths, 10, false, rng);
  const Matrix& w = p.layers[0].weights;
  CHECK(w.rows() == 300);
  CHECK(w.cols() == 400);
  CHECK(w.cwiseAbs().maxCoeff() <= 2.0 / 20.0);
  CHECK(p.layers[0].bias.isZero(0.0));
  // Truncation at two std keeps about 77.4% of the variance.
  const double var = w.squaredNorm() / static_cast<double>(w.size());
  CHECK(var * 400 == doctest::Approx(0.774).epsilon(0.02));
  CHECK(p.parameter_count() == 300 * 400 + 300 + 10 * 300 + 10);
}

TEST_CASE("feature spectrum") {
  const ImageSet data = toy_images(12, 5, 1);
  MlpParams p = zero_params(5, {3}, false);
  CHECK_THROWS_AS(feature_spectrum(p, data.images, 0), ZeroMatrixError);

  Rng rng(2);
  const std::vector<Index> one{1};
  p = init_mlp(5, one, 10, false, rng);
  p.layers[0].bias(0) = 1.0;  // keep the unit alive
  const auto s = feature_spectrum(p, data.images, 0);
  const Matrix a = mlp_forward(p, data.images).activations[0];
  CHECK(s.lambda_max == doctest::Approx(a.squaredNorm() / 12));
  CHECK(s.lambda_min_plus == s.lambda_max);

  const std::vector<Index> wide{40};
  p = init_mlp(5, wide, 10, false, rng);
  const auto w = feature_spectrum(p, data.images, 0);
  CHECK(w.rank <= 12);
  CHECK_THROWS_AS(feature_spectrum(p, data.images, 1), InvalidArgument);
}

TEST_CASE("training probes") {
  const ImageSet train = toy_images(30, 8, 5);
  const ImageSet test = toy_images(20, 8, 6);
  MlpConfig cfg;
  cfg.layer_widths = {6, 6};
  cfg.alpha = 0.05;
  cfg.T = 0;

  Rng rng(7);
  auto probes = mlp_gd_train(cfg, train, test, rng);
  REQUIRE(probes.size() == 1);
  CHECK(probes[0].iteration == 0);
  CHECK(probes[0].test_error >= 0);
  CHECK(probes[0].test_error <= 20);

  cfg.T = 40;
  cfg.probe_schedule = {0, 10, 40, 500};
  cfg.alpha = 0.0;
  Rng a(8);
  probes = mlp_gd_train(cfg, train, test, a);
  REQUIRE(probes.size() == 3);
  CHECK(probes[1].train_loss == probes[0].train_loss);
  CHECK(probes[2].penultimate_spectrum.lambda_min_plus == probes[0].penultimate_spectrum.lambda_min_plus);

  cfg.alpha = 0.05;
  Rng b(8);
  probes = mlp_gd_train(cfg, train, test, b);
  CHECK(probes.back().train_loss < probes.front().train_loss);

  // A huge step blows the output layer up before the hidden units can die.
  cfg.layer_widths = {6};
  cfg.alpha = 1e3;
  cfg.T = 200;
  Rng c(8);
  CHECK_THROWS_AS(mlp_gd_train(cfg, train, test, c), DivergenceError);

  // Dead hidden layer: rank 0 probe instead of an error.
  MlpConfig dead;
  dead.layer_widths = {3};
  dead.T = 0;
  MlpParams p = zero_params(8, {3}, false);
  probes = mlp_gd_train(dead, p, train, test);
  CHECK(probes[0].penultimate_spectrum.rank == 0);
  CHECK(std::isnan(probes[0].penultimate_spectrum.lambda_min_plus));
}

TEST_CASE("config validation") {
  MlpConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.layer_widths = {8, 4};
  cfg.skip_connections = true;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.layer_widths = std::vector<Index>(11, 4);
  cfg.skip_connections = false;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.layer_widths = {4, 0};
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("misclassification count") {
  MlpParams p = zero_params(2, {2}, false);
  p.layers[1].bias(3) = 1.0;
  const Matrix x = Matrix::Random(4, 2);
  CHECK(misclassification_count(p, x, {3, 3, 1, 0}) == 2);
}
