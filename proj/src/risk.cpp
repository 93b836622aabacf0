#include "ddlab/risk.hpp"

#include "ddlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddlab {

namespace {

const std::uint64_t kDatasetKey = hash_string("dataset");
const std::uint64_t kInitKey = hash_string("init");
const std::uint64_t kHoldoutKey = hash_string("holdout");

Vector gaussian_vector(Index d, double variance, Rng& rng) {
  Vector w(d);
  if (variance == 0.0) {
    w.setZero();
    return w;
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (Index j = 0; j < d; ++j) w(j) = normal(rng);
  return w;
}

void require_draws(std::int64_t n_sample_draws, const char* what) {
  if (n_sample_draws < 1) throw InvalidArgument(std::string(what) + ": need at least one sample draw");
}

// Unbiased estimate of L(w) - L(w*) from a fresh labelled sample.
double holdout_excess(const Vector& w, const Vector& wstar, const Dataset& holdout) {
  const Vector r_w = holdout.instances * w - holdout.labels;
  const Vector r_star = holdout.instances * wstar - holdout.labels;
  return 0.5 * (r_w.squaredNorm() - r_star.squaredNorm()) / static_cast<double>(holdout.n());
}

}  // namespace

RiskEstimate summarize(std::span<const double> values) {
  RiskEstimate est;
  est.n_trials = static_cast<std::int64_t>(values.size());
  if (values.empty()) return est;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return est;
}

double population_risk(const Vector& w, const Matrix& population_cov, const Vector& wstar, double sigma) {
  if (w.size() != wstar.size() || population_cov.rows() != w.size() || population_cov.cols() != w.size()) {
    throw InvalidArgument("population_risk: dimension mismatch");
  }
  const Vector e = w - wstar;
  return 0.5 * e.dot(population_cov * e) + 0.5 * sigma * sigma;
}

double empirical_risk(const Vector& w, const Matrix& x, const Vector& y) {
  if (x.cols() != w.size() || x.rows() != y.size() || x.rows() == 0) {
    throw InvalidArgument("empirical_risk: dimension mismatch");
  }
  return 0.5 * (x * w - y).squaredNorm() / static_cast<double>(x.rows());
}

double empirical_risk(const Vector& w, const Dataset& dataset) {
  return empirical_risk(w, dataset.instances, dataset.labels);
}

Dataset mc_dataset(const ProblemSpec& spec, std::uint64_t seed, std::int64_t draw) {
  Rng rng = make_rng(seed, {kDatasetKey, static_cast<std::uint64_t>(draw)});
  return make_regression_dataset(spec, rng);
}

double bound_init_coefficient(double wstar_sq_norm, double init_variance, Index d) {
  return wstar_sq_norm + init_variance * (2.0 + static_cast<double>(d));
}

std::vector<RiskEstimate> excess_risk_mc(const ProblemSpec& spec, double alpha, double init_variance,
                                         std::span<const std::int64_t> horizons, std::int64_t n_sample_draws,
                                         std::int64_t n_init_draws, std::uint64_t seed,
                                         const RiskEvaluation& eval) {
  spec.validate();
  require_draws(n_sample_draws, "excess_risk_mc");
  if (n_init_draws < 1) throw InvalidArgument("excess_risk_mc: need at least one initialization draw");
  for (std::int64_t T : horizons) GdConfig{alpha, T, init_variance}.validate();
  if (eval.population_cov) {
    if (eval.population_cov->rows() != spec.d || eval.population_cov->cols() != spec.d) {
      throw InvalidArgument("excess_risk_mc: population covariance has wrong shape");
    }
  } else if (eval.holdout_size < 1) {
    throw InvalidArgument("excess_risk_mc: need a population covariance or holdout_size >= 1");
  }

  const std::size_t H = horizons.size();
  std::vector<std::vector<double>> per_draw(H, std::vector<double>(static_cast<std::size_t>(n_sample_draws)));
  std::vector<double> lambda_min(static_cast<std::size_t>(n_sample_draws));
  const double inv_inits = 1.0 / static_cast<double>(n_init_draws);

  for (std::int64_t s = 0; s < n_sample_draws; ++s) {
    const Dataset ds = mc_dataset(spec, seed, s);
    const SpectralGdMap gd(linalg::covariance_range(ds.instances), gd_target_vector(ds.instances, ds.labels));
    lambda_min[static_cast<std::size_t>(s)] = gd.range().lambda_min_plus();
    std::optional<Dataset> holdout;
    if (!eval.population_cov) {
      ProblemSpec hs = spec;
      hs.n = eval.holdout_size;
      Rng hrng = make_rng(seed, {kHoldoutKey, static_cast<std::uint64_t>(s)});
      holdout = make_regression_dataset(hs, hrng);
    }
    std::vector<double> acc(H, 0.0);
    for (std::int64_t j = 0; j < n_init_draws; ++j) {
      Rng irng = make_rng(seed, {kInitKey, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(j)});
      const Vector w0 = gaussian_vector(spec.d, init_variance, irng);
      for (std::size_t h = 0; h < H; ++h) {
        Vector wT;
        try {
          wT = gd.apply(w0, alpha, horizons[h]);
        } catch (const DivergenceError& e) {
          std::ostringstream msg;
          msg << "excess_risk_mc: sample draw " << s << ", init draw " << j << ": " << e.what();
          throw DivergenceError(e.step(), msg.str());
        }
        double excess;
        if (eval.population_cov) {
          const Vector err = wT - spec.w_star;
          excess = 0.5 * err.dot(*eval.population_cov * err);
        } else {
          excess = holdout_excess(wT, spec.w_star, *holdout);
        }
        acc[h] += excess;
      }
    }
    for (std::size_t h = 0; h < H; ++h) per_draw[h][static_cast<std::size_t>(s)] = acc[h] * inv_inits;
  }

  const RiskEstimate lmin = summarize(lambda_min);
  std::vector<RiskEstimate> out;
  out.reserve(H);
  for (std::size_t h = 0; h < H; ++h) {
    RiskEstimate est = summarize(per_draw[h]);
    est.components["init_draws_per_sample"] = static_cast<double>(n_init_draws);
    est.components["lambda_min_plus_mean"] = lmin.mean;
    est.components["analytic"] = eval.population_cov ? 1.0 : 0.0;
    out.push_back(std::move(est));
  }
  return out;
}

RiskEstimate excess_risk_mc(const ProblemSpec& spec, const GdConfig& cfg, std::int64_t n_sample_draws,
                            std::int64_t n_init_draws, std::uint64_t seed, const RiskEvaluation& eval) {
  const std::int64_t T = cfg.T;
  return excess_risk_mc(spec, cfg.alpha, cfg.init_variance, std::span<const std::int64_t>(&T, 1), n_sample_draws,
                        n_init_draws, seed, eval)
      .front();
}

std::vector<RiskEstimate> optimization_error_mc(const ProblemSpec& spec, double alpha, double init_variance,
                                                std::span<const std::int64_t> horizons,
                                                std::int64_t n_sample_draws, std::uint64_t seed) {
  spec.validate();
  require_draws(n_sample_draws, "optimization_error_mc");
  for (std::int64_t T : horizons) GdConfig{alpha, T, init_variance}.validate();

  const std::size_t H = horizons.size();
  std::vector<std::vector<double>> factors(H, std::vector<double>(static_cast<std::size_t>(n_sample_draws)));
  std::vector<double> lambda_min(static_cast<std::size_t>(n_sample_draws));
  std::int64_t overshoot = 0;
  std::int64_t divergent = 0;
  for (std::int64_t s = 0; s < n_sample_draws; ++s) {
    const Dataset ds = mc_dataset(spec, seed, s);
    const linalg::SpectrumSummary spec_s = linalg::covariance_spectrum(ds.instances);
    const double l = spec_s.lambda_min_plus;
    lambda_min[static_cast<std::size_t>(s)] = l;
    if (alpha * l > 1.0) ++overshoot;
    if (alpha * spec_s.lambda_max > 2.0) ++divergent;
    for (std::size_t h = 0; h < H; ++h) {
      factors[h][static_cast<std::size_t>(s)] = std::pow(1.0 - alpha * l, 2.0 * static_cast<double>(horizons[h]));
    }
  }
  const double coef = bound_init_coefficient(spec.w_star.squaredNorm(), init_variance, spec.d);
  const RiskEstimate lmin = summarize(lambda_min);
  std::vector<RiskEstimate> out;
  for (std::size_t h = 0; h < H; ++h) {
    RiskEstimate f = summarize(factors[h]);
    RiskEstimate est;
    est.mean = f.mean * coef;
    est.std_error = f.std_error * coef;
    est.n_trials = f.n_trials;
    est.components["contraction_factor_mean"] = f.mean;
    est.components["init_coefficient"] = coef;
    est.components["lambda_min_plus_mean"] = lmin.mean;
    if (overshoot > 0) {
      est.warnings.push_back(std::to_string(overshoot) + " draw(s) with alpha * lambda_min_plus > 1");
    }
    if (divergent > 0) {
      est.warnings.push_back(std::to_string(divergent) +
                             " draw(s) with alpha * lambda_max > 2: GD diverges, factor reported unclamped");
    }
    out.push_back(std::move(est));
  }
  return out;
}

RiskEstimate optimization_error_mc(const ProblemSpec& spec, const GdConfig& cfg, std::int64_t n_sample_draws,
                                   std::uint64_t seed) {
  const std::int64_t T = cfg.T;
  return optimization_error_mc(spec, cfg.alpha, cfg.init_variance, std::span<const std::int64_t>(&T, 1),
                               n_sample_draws, seed)
      .front();
}

GaussianNormReport gaussian_norm_identity_oracle(double nu, const Vector& x0, std::int64_t n_samples,
                                                 std::uint64_t seed) {
  if (n_samples < 10'000) throw InvalidArgument("gaussian_norm_identity_oracle: need n_samples >= 1e4");
  if (!(nu >= 0.0)) throw InvalidArgument("gaussian_norm_identity_oracle: nu must be >= 0");
  const Index d = x0.size();
  Rng rng = make_rng(seed, {hash_string("gaussian_norm")});
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  for (auto& v : values) v = (gaussian_vector(d, nu * nu, rng) - x0).squaredNorm();
  const RiskEstimate est = summarize(values);

  GaussianNormReport r;
  r.empirical = est.mean;
  r.std_error = est.std_error;
  r.exact_formula = x0.squaredNorm() + nu * nu * static_cast<double>(d);
  r.bound_formula = bound_init_coefficient(x0.squaredNorm(), nu * nu, d);
  const double tol = std::max(3.0 * est.std_error, 1e-12 * std::max(1.0, r.exact_formula));
  r.matches_exact = std::abs(r.empirical - r.exact_formula) <= tol;
  r.matches_bound = std::abs(r.empirical - r.bound_formula) <= tol;
  return r;
}

}  // namespace ddlab
