#include "ddlab/mlp.hpp"

#include "ddlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace ddlab {

namespace {

struct ForwardCache {
  std::vector<Matrix> pre;          // pre-activations per hidden layer
  std::vector<Matrix> activations;  // post-activations (including skip)
  Matrix output;
};

ForwardCache forward_cached(const MlpParams& params, const Matrix& batch) {
  if (params.layers.empty()) throw InvalidArgument("mlp_forward: network has no layers");
  if (batch.cols() != params.layers.front().weights.cols()) {
    std::ostringstream msg;
    msg << "mlp_forward: input has " << batch.cols() << " features, network expects "
        << params.layers.front().weights.cols();
    throw InvalidArgument(msg.str());
  }
  ForwardCache c;
  const std::size_t hidden = params.layers.size() - 1;
  const Matrix* prev = &batch;
  for (std::size_t l = 0; l < hidden; ++l) {
    const DenseLayer& layer = params.layers[l];
    Matrix z = (*prev) * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    Matrix a = z.cwiseMax(0.0);
    if (params.skip_connections && l >= 1) a += *prev;
    c.pre.push_back(std::move(z));
    c.activations.push_back(std::move(a));
    prev = &c.activations.back();
  }
  const DenseLayer& out = params.layers.back();
  c.output = (*prev) * out.weights.transpose();
  c.output.rowwise() += out.bias.transpose();
  return c;
}

double truncated_normal(Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const double z = normal(rng);
    if (std::abs(z) <= 2.0) return z * stddev;
  }
}

}  // namespace

void MlpConfig::validate() const {
  if (layer_widths.empty() || layer_widths.size() > 10) {
    throw InvalidArgument("MlpConfig: need between 1 and 10 hidden layers");
  }
  for (Index w : layer_widths) {
    if (w < 1) throw InvalidArgument("MlpConfig: hidden widths must be >= 1");
  }
  if (skip_connections) {
    for (std::size_t l = 1; l < layer_widths.size(); ++l) {
      if (layer_widths[l] != layer_widths[l - 1]) {
        throw InvalidArgument("MlpConfig: identity skip connections need equal consecutive widths");
      }
    }
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("MlpConfig: alpha must be >= 0");
  if (T < 0) throw InvalidArgument("MlpConfig: T must be >= 0");
  if (train_subset_size < 1) throw InvalidArgument("MlpConfig: train_subset_size must be >= 1");
  for (std::int64_t p : probe_schedule) {
    if (p < 0) throw InvalidArgument("MlpConfig: probe iterations must be >= 0");
  }
}

Index MlpParams::parameter_count() const {
  Index count = 0;
  for (const DenseLayer& l : layers) count += l.weights.size() + l.bias.size();
  return count;
}

MlpParams init_mlp(Index input_dim, std::span<const Index> hidden_widths, Index output_dim, bool skip_connections,
                   Rng& rng) {
  if (input_dim < 1 || output_dim < 1) throw InvalidArgument("init_mlp: dimensions must be >= 1");
  MlpParams p;
  p.skip_connections = skip_connections;
  Index fan_in = input_dim;
  auto make_layer = [&](Index fan_out) {
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    const double stddev = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index i = 0; i < fan_out; ++i) {
      for (Index j = 0; j < fan_in; ++j) layer.weights(i, j) = truncated_normal(rng, stddev);
    }
    layer.bias = Vector::Zero(fan_out);
    fan_in = fan_out;
    return layer;
  };
  for (Index w : hidden_widths) {
    if (w < 1) throw InvalidArgument("init_mlp: hidden widths must be >= 1");
    p.layers.push_back(make_layer(w));
  }
  p.layers.push_back(make_layer(output_dim));
  return p;
}

ForwardPass mlp_forward(const MlpParams& params, const Matrix& batch) {
  ForwardCache c = forward_cached(params, batch);
  return ForwardPass{std::move(c.activations), std::move(c.output)};
}

double mlp_loss(const MlpParams& params, const Matrix& inputs, const Matrix& targets) {
  const Matrix out = mlp_forward(params, inputs).output;
  if (out.rows() != targets.rows() || out.cols() != targets.cols()) {
    throw InvalidArgument("mlp_loss: target shape mismatch");
  }
  return 0.5 * (out - targets).squaredNorm() / static_cast<double>(inputs.rows());
}

LossGradient mlp_loss_gradient(const MlpParams& params, const Matrix& inputs, const Matrix& targets) {
  const ForwardCache c = forward_cached(params, inputs);
  if (c.output.rows() != targets.rows() || c.output.cols() != targets.cols()) {
    throw InvalidArgument("mlp_loss_gradient: target shape mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(inputs.rows());
  const Matrix residual = c.output - targets;

  LossGradient lg;
  lg.loss = 0.5 * residual.squaredNorm() * inv_n;
  lg.gradient.skip_connections = params.skip_connections;
  lg.gradient.layers.resize(params.layers.size());

  const std::size_t hidden = params.layers.size() - 1;
  auto input_of = [&](std::size_t l) -> const Matrix& { return l == 0 ? inputs : c.activations[l - 1]; };

  Matrix delta = residual * inv_n;  // dL/d(output)
  {
    DenseLayer& g = lg.gradient.layers[hidden];
    g.weights = delta.transpose() * input_of(hidden);
    g.bias = delta.colwise().sum().transpose();
  }
  Matrix d_act = delta * params.layers[hidden].weights;  // dL/d(a_{hidden-1})
  for (std::size_t l = hidden; l-- > 0;) {
    const Matrix dz = d_act.cwiseProduct((c.pre[l].array() > 0.0).cast<double>().matrix());
    DenseLayer& g = lg.gradient.layers[l];
    g.weights = dz.transpose() * input_of(l);
    g.bias = dz.colwise().sum().transpose();
    if (l > 0) {
      Matrix next = dz * params.layers[l].weights;
      if (params.skip_connections) next += d_act;
      d_act = std::move(next);
    }
  }
  return lg;
}

Matrix one_hot(const std::vector<int>& labels, Index classes) {
  Matrix t = Matrix::Zero(static_cast<Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw InvalidArgument("one_hot: label out of range");
    t(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return t;
}

Index misclassification_count(const MlpParams& params, const Matrix& inputs, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size()) {
    throw InvalidArgument("misclassification_count: label count mismatch");
  }
  Index errors = 0;
  constexpr Index kChunk = 2048;
  for (Index start = 0; start < inputs.rows(); start += kChunk) {
    const Index len = std::min(kChunk, inputs.rows() - start);
    const Matrix out = mlp_forward(params, inputs.middleRows(start, len)).output;
    for (Index i = 0; i < len; ++i) {
      Index arg = 0;
      out.row(i).maxCoeff(&arg);
      if (arg != labels[static_cast<std::size_t>(start + i)]) ++errors;
    }
  }
  return errors;
}

linalg::SpectrumSummary feature_spectrum(const MlpParams& params, const Matrix& inputs, Index layer_index,
                                         bool center) {
  if (layer_index < 0 || layer_index >= params.hidden_count()) {
    throw InvalidArgument("feature_spectrum: layer index " + std::to_string(layer_index) + " is not a hidden layer");
  }
  ForwardPass fp = mlp_forward(params, inputs);
  Matrix a = std::move(fp.activations[static_cast<std::size_t>(layer_index)]);
  if (center) a.rowwise() -= a.colwise().mean();
  return linalg::covariance_spectrum(a);
}

namespace {

// A layer whose units are all dead has no positive eigenvalue. That is a
// measurement, not a failure, so the probe records rank 0 and NaN values.
linalg::SpectrumSummary probe_spectrum(const MlpParams& params, const Matrix& inputs, Index layer, bool center) {
  try {
    return feature_spectrum(params, inputs, layer, center);
  } catch (const ZeroMatrixError&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    linalg::SpectrumSummary s;
    const Index width = params.layers[static_cast<std::size_t>(layer)].bias.size();
    s.eigenvalues.assign(static_cast<std::size_t>(std::min(width, inputs.rows())), 0.0);
    s.tail_sums.assign(s.eigenvalues.size() + 1, 0.0);
    s.rank = 0;
    s.lambda_min_plus = nan;
    s.lambda_max = 0.0;
    s.condition_number = nan;
    return s;
  }
}

}  // namespace

std::vector<MlpProbe> mlp_gd_train(const MlpConfig& config, MlpParams params, const ImageSet& train,
                                   const ImageSet& test) {
  config.validate();
  if (params.hidden_count() != static_cast<Index>(config.layer_widths.size())) {
    throw InvalidArgument("mlp_gd_train: parameters do not match the configured depth");
  }
  std::set<std::int64_t> schedule;
  if (config.probe_schedule.empty()) {
    schedule = {0, config.T};
  } else {
    for (std::int64_t p : config.probe_schedule) {
      if (p <= config.T) schedule.insert(p);
    }
  }
  const Matrix targets = one_hot(train.labels);
  const Index last_hidden = params.hidden_count() - 1;

  auto probe = [&](std::int64_t iteration, double loss) {
    MlpProbe p;
    p.iteration = iteration;
    p.train_loss = loss;
    p.test_error = misclassification_count(params, test.images, test.labels);
    p.penultimate_spectrum = probe_spectrum(params, train.images, last_hidden, config.center_features);
    if (config.probe_all_layers) {
      for (Index l = 0; l <= last_hidden; ++l) {
        p.per_layer_lambda_min_plus.push_back(
            probe_spectrum(params, train.images, l, config.center_features).lambda_min_plus);
      }
    }
    return p;
  };

  std::vector<MlpProbe> probes;
  for (std::int64_t t = 0;; ++t) {
    const bool want_probe = schedule.count(t) > 0;
    if (t == config.T) {
      const double loss = mlp_loss(params, train.images, targets);
      if (!std::isfinite(loss)) throw DivergenceError(t, "MLP training diverged");
      if (want_probe) probes.push_back(probe(t, loss));
      break;
    }
    LossGradient lg = mlp_loss_gradient(params, train.images, targets);
    if (!std::isfinite(lg.loss)) throw DivergenceError(t, "MLP training diverged");
    if (want_probe) probes.push_back(probe(t, lg.loss));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      params.layers[l].weights -= config.alpha * lg.gradient.layers[l].weights;
      params.layers[l].bias -= config.alpha * lg.gradient.layers[l].bias;
    }
  }
  return probes;
}

std::vector<MlpProbe> mlp_gd_train(const MlpConfig& config, const ImageSet& train, const ImageSet& test, Rng& rng) {
  config.validate();
  const MlpParams params =
      init_mlp(train.images.cols(), config.layer_widths, 10, config.skip_connections, rng);
  return mlp_gd_train(config, params, train, test);
}

}  // namespace ddlab
