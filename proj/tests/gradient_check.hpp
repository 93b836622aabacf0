// Central-difference check of mlp_loss_gradient, shared by the unit and
// acceptance tests.
#pragma once

#include "ddlab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ddlab::testing {

struct GradientCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  Index parameters = 0;
};

// |a - b| / max(|a|, |b|, floor): the floor keeps parameters whose true
// partial derivative is zero from dividing roundoff by roundoff.
inline GradientCheck check_gradient(const MlpParams& params, const Matrix& inputs, const Matrix& targets,
                                    double h = 1e-5, double floor = 1e-6) {
  const LossGradient analytic = mlp_loss_gradient(params, inputs, targets);
  GradientCheck out;
  MlpParams probe = params;
  auto visit = [&](double& slot, double grad) {
    const double saved = slot;
    slot = saved + h;
    const double up = mlp_loss(probe, inputs, targets);
    slot = saved - h;
    const double down = mlp_loss(probe, inputs, targets);
    slot = saved;
    const double fd = (up - down) / (2 * h);
    const double abs_err = std::abs(fd - grad);
    out.max_abs_error = std::max(out.max_abs_error, abs_err);
    out.max_rel_error = std::max(out.max_rel_error, abs_err / std::max({std::abs(fd), std::abs(grad), floor}));
    ++out.parameters;
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    Matrix& w = probe.layers[l].weights;
    for (Index j = 0; j < w.cols(); ++j)
      for (Index i = 0; i < w.rows(); ++i) visit(w(i, j), analytic.gradient.layers[l].weights(i, j));
    Vector& b = probe.layers[l].bias;
    for (Index i = 0; i < b.size(); ++i) visit(b(i), analytic.gradient.layers[l].bias(i));
  }
  return out;
}

// Width-4, depth-2 network on 20 random samples with one-hot targets.
// Biases are drawn away from zero so the check also covers bias gradients.
struct GradientToy {
  MlpParams params;
  Matrix inputs;
  Matrix targets;
};

inline GradientToy gradient_toy(bool skip, std::uint64_t seed) {
  Rng rng(seed);
  GradientToy toy;
  const std::vector<Index> widths{4, 4};
  toy.params = init_mlp(6, widths, 10, skip, rng);
  for (auto& layer : toy.params.layers)
    for (Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = 0.1 * standard_normal(rng);
  toy.inputs.resize(20, 6);
  for (Index j = 0; j < 6; ++j)
    for (Index i = 0; i < 20; ++i) toy.inputs(i, j) = standard_normal(rng);
  std::vector<int> labels(20);
  for (int i = 0; i < 20; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 10);
  toy.targets = one_hot(labels);
  return toy;
}

}  // namespace ddlab::testing
