#include "ddlab/gd.hpp"

#include "ddlab/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ddlab {

namespace {

// Per-eigenvalue factors of the T-step map: (1 - a l)^T and a sum_{t<T} (1 - a l)^t.
struct StepFactors {
  double contraction;
  double accumulation;
};

StepFactors step_factors(double lambda, double alpha, std::int64_t T) {
  const double t = static_cast<double>(T);
  if (T == 0) return {1.0, 0.0};
  if (lambda == 0.0 || alpha == 0.0) return {1.0, alpha * t};
  const double r = 1.0 - alpha * lambda;
  if (r > 0.0) {
    const double log_r = std::log1p(-alpha * lambda);
    const double em1 = std::expm1(t * log_r);  // r^T - 1
    return {em1 + 1.0, -em1 / lambda};
  }
  const double p = std::pow(r, t);
  return {p, (1.0 - p) / lambda};
}

double half_mean_square(const Vector& residual) {
  return 0.5 * residual.squaredNorm() / static_cast<double>(residual.size());
}

void require_consistent(const Matrix& x, const Vector& y, const Vector& w0, const char* what) {
  if (x.rows() != y.size() || x.cols() != w0.size()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (X is " << x.rows() << "x" << x.cols() << ", y has " << y.size()
        << ", w0 has " << w0.size() << ")";
    throw InvalidArgument(msg.str());
  }
  if (x.rows() == 0) throw InvalidArgument(std::string(what) + ": empty dataset");
}

// Final iterate only, no bookkeeping.
Vector gd_final(const Matrix& x, const Vector& y, const Vector& w0, double alpha, std::int64_t T) {
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Vector w = w0;
  for (std::int64_t t = 0; t < T; ++t) {
    w.noalias() -= (alpha * inv_n) * (x.transpose() * (x * w - y));
    if (!w.allFinite()) throw DivergenceError(t + 1, "gradient descent diverged");
  }
  return w;
}

}  // namespace

void GdConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("GdConfig: alpha must be finite and >= 0");
  if (T < 0) throw InvalidArgument("GdConfig: T must be >= 0");
  if (!(init_variance >= 0.0)) throw InvalidArgument("GdConfig: init_variance must be >= 0");
}

GdTrace gd_iterate(const Matrix& x, const Vector& y, const Vector& w0, const GdConfig& cfg) {
  cfg.validate();
  require_consistent(x, y, w0, "gd_iterate");
  const std::int64_t n = x.rows();
  const std::int64_t d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  GdTrace trace;
  const std::int64_t volume = n * d * cfg.T;
  trace.stride = volume <= kFullTraceBudget ? 1 : (volume + kFullTraceBudget - 1) / kFullTraceBudget;
  trace.grad_sq_norms.reserve(static_cast<std::size_t>(cfg.T));
  trace.empirical_losses.reserve(static_cast<std::size_t>(cfg.T + 1));
  trace.label_loss = half_mean_square(y);

  Vector w = w0;
  Vector residual = x * w - y;
  Vector grad(d);
  trace.iterates.push_back(w);
  trace.iterate_steps.push_back(0);
  for (std::int64_t t = 0; t < cfg.T; ++t) {
    trace.empirical_losses.push_back(half_mean_square(residual));
    grad.noalias() = inv_n * (x.transpose() * residual);
    trace.grad_sq_norms.push_back(grad.squaredNorm());
    w.noalias() -= cfg.alpha * grad;
    if (!w.allFinite()) throw DivergenceError(t + 1, "gradient descent diverged");
    residual.noalias() = x * w - y;
    const std::int64_t step = t + 1;
    if (step % trace.stride == 0 || step == cfg.T) {
      trace.iterates.push_back(w);
      trace.iterate_steps.push_back(step);
    }
  }
  trace.empirical_losses.push_back(half_mean_square(residual));
  trace.final = std::move(w);
  return trace;
}

GdTrace gd_iterate(const Dataset& dataset, const Vector& w0, const GdConfig& cfg) {
  return gd_iterate(dataset.instances, dataset.labels, w0, cfg);
}

Vector gd_target_vector(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size() || x.rows() == 0) throw InvalidArgument("gd_target_vector: dimension mismatch");
  return x.transpose() * y / static_cast<double>(x.rows());
}

Vector gd_closed_form(const Matrix& sigma_hat, const Vector& c, const Vector& w0, const GdConfig& cfg) {
  cfg.validate();
  const Index d = sigma_hat.rows();
  if (sigma_hat.cols() != d || c.size() != d || w0.size() != d) {
    throw InvalidArgument("gd_closed_form: dimension mismatch");
  }
  if (cfg.T == 0) return w0;
  const linalg::Eigendecomposition eig = linalg::sym_eigendecompose(sigma_hat);
  const Vector w_coords = eig.eigenvectors.transpose() * w0;
  const Vector c_coords = eig.eigenvectors.transpose() * c;
  Vector out_coords(d);
  for (Index i = 0; i < d; ++i) {
    const StepFactors f = step_factors(eig.eigenvalues(i), cfg.alpha, cfg.T);
    out_coords(i) = f.contraction * w_coords(i) + f.accumulation * c_coords(i);
  }
  Vector out = eig.eigenvectors * out_coords;
  if (!out.allFinite()) throw DivergenceError(cfg.T, "gd_closed_form overflowed");
  return out;
}

SpectralGdMap::SpectralGdMap(linalg::RangeBasis range, const Vector& c)
    : range_(std::move(range)), c_coords_(range_.basis.transpose() * c) {}

Vector SpectralGdMap::apply(const Vector& w0, double alpha, std::int64_t T) const {
  if (w0.size() != range_.basis.rows()) throw InvalidArgument("SpectralGdMap::apply: dimension mismatch");
  if (T == 0) return w0;
  const Vector w_coords = range_.basis.transpose() * w0;
  Vector delta(range_.rank());
  for (Index i = 0; i < range_.rank(); ++i) {
    const StepFactors f = step_factors(range_.eigenvalues(i), alpha, T);
    delta(i) = (f.contraction - 1.0) * w_coords(i) + f.accumulation * c_coords_(i);
  }
  Vector out = w0 + range_.basis * delta;
  if (!out.allFinite()) throw DivergenceError(T, "spectral GD map overflowed");
  return out;
}

double smoothness_constant(const Matrix& x) {
  const Vector ev = linalg::covariance_eigenvalues(x);
  return ev.size() ? std::max(ev(0), 0.0) : 0.0;
}

AdmissibilityReport check_admissibility(const Dataset& dataset, const GdConfig& cfg, std::int64_t trials, Rng& rng) {
  cfg.validate();
  if (trials < 0) throw InvalidArgument("check_admissibility: trials must be >= 0");
  const Matrix& x = dataset.instances;
  const linalg::RangeBasis range = linalg::covariance_range(x);
  const double lmin = range.lambda_min_plus();
  if (cfg.alpha * range.lambda_max() > 1.0 + 1e-12) {
    throw InvalidArgument("check_admissibility: requires alpha * lambda_max <= 1");
  }
  AdmissibilityReport report;
  report.trials = trials;
  report.contraction = step_factors(lmin, cfg.alpha, cfg.T).contraction;
  const Index d = x.cols();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::int64_t k = 0; k < trials; ++k) {
    Vector w0(d), u0(d);
    for (Index j = 0; j < d; ++j) w0(j) = normal(rng);
    for (Index j = 0; j < d; ++j) u0(j) = normal(rng);
    const Vector a = gd_final(x, dataset.labels, w0, cfg.alpha, cfg.T);
    const Vector b = gd_final(x, dataset.labels, u0, cfg.alpha, cfg.T);
    const double lhs = (range.basis.transpose() * (a - b)).norm();
    const double rhs = report.contraction * (w0 - u0).norm();
    // The difference of two computed iterates is not resolved below a few
    // ulps of their size, which matters once the contraction reaches ~1e-14.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (a.norm() + b.norm());
    const double ratio = lhs / std::max({rhs, floor, std::numeric_limits<double>::min()});
    report.max_ratio = std::max(report.max_ratio, ratio);
    if (ratio > 1.0 + 1e-8) ++report.violations;
  }
  return report;
}

DescentLemmaReport check_descent_lemma(const GdTrace& trace, double alpha, double H) {
  if (!(alpha > 0.0)) throw InvalidArgument("check_descent_lemma: alpha must be > 0");
  if (alpha * H > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "check_descent_lemma: precondition alpha <= 1/H violated (alpha * H = " << alpha * H << ")";
    throw InvalidArgument(msg.str());
  }
  if (trace.empirical_losses.size() != trace.grad_sq_norms.size() + 1) {
    throw InvalidArgument("check_descent_lemma: malformed trace");
  }
  DescentLemmaReport r;
  for (double g : trace.grad_sq_norms) r.lhs += g;
  const double l0 = trace.empirical_losses.front();
  const double lT = trace.empirical_losses.back();
  r.rhs = (2.0 / alpha) * (l0 - lT);
  // Loss differences carry rounding of order eps * L(w_0); near an
  // interpolating solution the residual itself is only known to eps * |y|.
  const double eps = std::numeric_limits<double>::epsilon();
  const double roundoff = (2.0 / alpha) * 64.0 * eps * (l0 + eps * trace.label_loss);
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-8) + roundoff;
  return r;
}

NoiseCouplingReport noise_coupling_gap(const Dataset& dataset, const Vector& wstar, const GdConfig& cfg) {
  cfg.validate();
  const Matrix& x = dataset.instances;
  require_consistent(x, dataset.labels, wstar, "noise_coupling_gap");
  if (dataset.clean_labels.size() != dataset.labels.size()) {
    throw InvalidArgument("noise_coupling_gap: dataset carries no clean labels");
  }
  const linalg::RangeBasis range = linalg::covariance_range(x);
  const double lmin = range.lambda_min_plus();
  if (cfg.alpha * range.lambda_max() > 1.0 + 1e-12) {
    throw InvalidArgument("noise_coupling_gap: requires alpha * lambda_max <= 1");
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows());

  NoiseCouplingReport report;
  const Vector eps = dataset.labels - dataset.clean_labels;
  if (dataset.sigma == 0.0 || eps.isZero(0.0)) {
    report.notice = "noise-free dataset: noisy and clean runs coincide, gap is identically zero";
  }
  report.noise_drive = cfg.alpha * inv_n * (range.basis.transpose() * (x.transpose() * eps)).norm();

  Vector w_noisy = wstar;
  Vector w_clean = wstar;
  double bound = 0.0;
  report.coupled_gap.reserve(static_cast<std::size_t>(cfg.T + 1));
  report.recursion_bound.reserve(static_cast<std::size_t>(cfg.T + 1));
  report.coupled_gap.push_back(0.0);
  report.recursion_bound.push_back(0.0);
  for (std::int64_t t = 0; t < cfg.T; ++t) {
    w_noisy.noalias() -= (cfg.alpha * inv_n) * (x.transpose() * (x * w_noisy - dataset.labels));
    w_clean.noalias() -= (cfg.alpha * inv_n) * (x.transpose() * (x * w_clean - dataset.clean_labels));
    if (!w_noisy.allFinite() || !w_clean.allFinite()) throw DivergenceError(t + 1, "noise_coupling_gap diverged");
    bound = (1.0 - cfg.alpha * lmin) * bound + report.noise_drive;
    report.coupled_gap.push_back((range.basis.transpose() * (w_noisy - w_clean)).norm());
    report.recursion_bound.push_back(bound);
  }
  return report;
}

}  // namespace ddlab
