#pragma once

#include "ddlab/idx.hpp"
#include "ddlab/linalg.hpp"
#include "ddlab/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ddlab {

/// Fully connected ReLU network trained by full-batch GD on squared loss
/// against one-hot targets.
struct MlpConfig {
  std::vector<Index> layer_widths;  // hidden widths, 1 to 10 layers
  bool skip_connections = false;
  double alpha = 0.01;
  std::int64_t T = 0;
  Index train_subset_size = 256;
  /// Iterations (0 = initialization) at which probes are recorded; entries
  /// beyond T are ignored. Empty means {0, T}.
  std::vector<std::int64_t> probe_schedule;
  /// Subtract feature means before the spectrum (off: uncentered A^T A / n).
  bool center_features = false;
  /// Record lambda_min_plus of every hidden layer, not just the last.
  bool probe_all_layers = false;

  void validate() const;
};

struct DenseLayer {
  Matrix weights;  // fan_out x fan_in
  Vector bias;
};

/// Hidden layers followed by the linear output layer.
struct MlpParams {
  std::vector<DenseLayer> layers;
  bool skip_connections = false;

  Index hidden_count() const { return static_cast<Index>(layers.size()) - 1; }
  Index parameter_count() const;
};

/// Weights from a normal with std 1/sqrt(fan_in) truncated at two standard
/// deviations; biases zero.
MlpParams init_mlp(Index input_dim, std::span<const Index> hidden_widths, Index output_dim, bool skip_connections,
                   Rng& rng);

struct ForwardPass {
  std::vector<Matrix> activations;  // one n x width matrix per hidden layer
  Matrix output;                    // n x output_dim
};

/// Hidden layer l computes relu(W a + b), plus the previous activation when
/// skip connections are on and l >= 1.
ForwardPass mlp_forward(const MlpParams& params, const Matrix& batch);

/// (1 / 2N) sum_i ||f(x_i) - t_i||^2.
double mlp_loss(const MlpParams& params, const Matrix& inputs, const Matrix& targets);

struct LossGradient {
  double loss = 0.0;
  MlpParams gradient;
};

LossGradient mlp_loss_gradient(const MlpParams& params, const Matrix& inputs, const Matrix& targets);

Matrix one_hot(const std::vector<int>& labels, Index classes = 10);

/// Number of rows whose argmax output differs from the label.
Index misclassification_count(const MlpParams& params, const Matrix& inputs, const std::vector<int>& labels);

/// Spectrum of the uncentered (or centered) covariance of hidden layer
/// `layer_index` (0-based) over `inputs`.
linalg::SpectrumSummary feature_spectrum(const MlpParams& params, const Matrix& inputs, Index layer_index,
                                         bool center = false);

/// When every unit of the probed layer is dead the spectrum has rank 0 and
/// NaN lambda_min_plus.
struct MlpProbe {
  std::int64_t iteration = 0;
  Index test_error = 0;
  double train_loss = 0.0;
  linalg::SpectrumSummary penultimate_spectrum;
  std::vector<double> per_layer_lambda_min_plus;
};

/// Trains on `train` (already subset) and records probes at the scheduled
/// iterations. Throws DivergenceError on a non-finite loss.
std::vector<MlpProbe> mlp_gd_train(const MlpConfig& config, const ImageSet& train, const ImageSet& test, Rng& rng);

/// Same, starting from given parameters.
std::vector<MlpProbe> mlp_gd_train(const MlpConfig& config, MlpParams params, const ImageSet& train,
                                   const ImageSet& test);

}  // namespace ddlab
