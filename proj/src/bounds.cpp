#include "ddlab/bounds.hpp"

#include "ddlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ddlab {

namespace {

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

double noise_term(double sigma, Index n, double lambda_min_plus) {
  if (n < 1) throw InvalidArgument("noise_term: n must be >= 1");
  if (!(lambda_min_plus > 0.0)) throw InvalidArgument("noise_term: lambda_min_plus must be > 0");
  return 4.0 * sigma * sigma / static_cast<double>(n) / (lambda_min_plus * lambda_min_plus);
}

std::vector<BoundReport> bound_reports(const ProblemSpec& spec, double alpha, double init_variance,
                                       std::span<const std::int64_t> horizons, std::int64_t n_sample_draws,
                                       std::uint64_t seed) {
  spec.validate();
  if (n_sample_draws < 1) throw InvalidArgument("bound_reports: need at least one sample draw");
  for (std::int64_t T : horizons) GdConfig{alpha, T, init_variance}.validate();

  const std::size_t H = horizons.size();
  const auto draws = static_cast<std::size_t>(n_sample_draws);
  const double coef = bound_init_coefficient(spec.w_star.squaredNorm(), init_variance, spec.d);

  std::vector<std::vector<double>> opt(H, std::vector<double>(draws));
  std::vector<double> complement(draws);
  std::vector<double> noise;
  std::vector<double> noise_or_zero(draws, 0.0);
  std::vector<double> lambda_min;
  std::int64_t excluded = 0;
  std::int64_t divergent = 0;

  for (std::size_t s = 0; s < draws; ++s) {
    const Dataset ds = mc_dataset(spec, seed, static_cast<std::int64_t>(s));
    linalg::RangeBasis range;
    bool degenerate = false;
    try {
      range = linalg::covariance_range(ds.instances);
      degenerate = range.rank() == 0;
    } catch (const ZeroMatrixError&) {
      degenerate = true;
    }
    if (degenerate) {
      ++excluded;
      for (std::size_t h = 0; h < H; ++h) opt[h][s] = coef;
      complement[s] = 0.5 * spec.w_star.squaredNorm();
      continue;
    }
    const double l = range.lambda_min_plus();
    lambda_min.push_back(l);
    if (alpha * range.lambda_max() > 2.0) ++divergent;
    for (std::size_t h = 0; h < H; ++h) {
      opt[h][s] = std::pow(1.0 - alpha * l, 2.0 * static_cast<double>(horizons[h])) * coef;
    }
    const linalg::Projector m = linalg::projector_range(range.basis);
    complement[s] = 0.5 * (spec.w_star - m.matrix * spec.w_star).squaredNorm();
    if (spec.sigma > 0.0) {
      noise_or_zero[s] = noise_term(spec.sigma, spec.n, l);
      noise.push_back(noise_or_zero[s]);
    }
  }

  const RiskEstimate compl_est = summarize(complement);
  const RiskEstimate noise_est = summarize(noise);
  const RiskEstimate lmin_est = summarize(lambda_min);
  std::vector<BoundReport> out;
  out.reserve(H);
  for (std::size_t h = 0; h < H; ++h) {
    BoundReport r;
    const RiskEstimate opt_est = summarize(opt[h]);
    r.optimization = {opt_est.mean, opt_est.std_error};
    r.complement = {compl_est.mean, compl_est.std_error};
    if (spec.sigma > 0.0) r.noise = {noise_est.mean, noise_est.std_error};
    r.total = r.optimization.value + r.noise.value + r.complement.value;
    std::vector<double> totals(draws);
    for (std::size_t s = 0; s < draws; ++s) totals[s] = opt[h][s] + noise_or_zero[s] + complement[s];
    r.total_std_error = summarize(totals).std_error;
    r.excluded_trials = excluded;
    r.lambda_min_plus_mean = lmin_est.mean;
    if (excluded > 0) {
      r.warnings.push_back(std::to_string(excluded) + " draw(s) with numerically zero sample covariance excluded");
    }
    if (divergent > 0) {
      r.warnings.push_back(std::to_string(divergent) + " draw(s) with alpha * lambda_max > 2 (GD diverges)");
    }
    r.metadata = {spec.n, spec.d, alpha, horizons[h], init_variance, spec.sigma, n_sample_draws};
    out.push_back(std::move(r));
  }
  return out;
}

BoundReport bound_noiseless(const ProblemSpec& spec, const GdConfig& cfg, std::int64_t n_sample_draws,
                            std::uint64_t seed) {
  if (spec.sigma != 0.0) throw InvalidArgument("bound_noiseless: requires sigma == 0");
  const std::int64_t T = cfg.T;
  return bound_reports(spec, cfg.alpha, cfg.init_variance, std::span<const std::int64_t>(&T, 1), n_sample_draws,
                       seed)
      .front();
}

BoundReport bound_noisy(const ProblemSpec& spec, const GdConfig& cfg, std::int64_t n_sample_draws,
                        std::uint64_t seed) {
  if (!(spec.sigma > 0.0)) throw InvalidArgument("bound_noisy: requires sigma > 0");
  const std::int64_t T = cfg.T;
  return bound_reports(spec, cfg.alpha, cfg.init_variance, std::span<const std::int64_t>(&T, 1), n_sample_draws,
                       seed)
      .front();
}

double bai_yin_constant() { return std::pow(2.0, 3.5) * std::sqrt(std::log(9.0)); }

double bai_yin_lower_bound(double lambda_min_plus_pop, double K, Index n, Index d, double x) {
  if (!(K > 0.0)) throw InvalidArgument("bai_yin_lower_bound: K must be > 0");
  if (!(x >= 0.0)) throw InvalidArgument("bai_yin_lower_bound: x must be >= 0");
  if (n < 1 || d < 1) throw InvalidArgument("bai_yin_lower_bound: n and d must be >= 1");
  const double c = bai_yin_constant();
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double k2 = K * K;
  double inner;
  if (n >= d) {
    inner = 1.0 - k2 * (c * std::sqrt(dd / nn) + std::sqrt(x / nn));
  } else {
    inner = std::sqrt(dd / nn) - k2 * (c + 6.0 * std::sqrt(x / nn));
  }
  const double p = positive_part(inner);
  return lambda_min_plus_pop * p * p;
}

ConcentrationReport concentration_violation_rate(InputDistribution dist, Index n, Index d, double x, double K,
                                                 std::int64_t trials, std::uint64_t seed) {
  if (dist != InputDistribution::isotropic_gaussian && dist != InputDistribution::isotropic_rademacher) {
    throw InvalidArgument("concentration_violation_rate: distribution must be isotropic");
  }
  if (n < d && dist != InputDistribution::isotropic_rademacher) {
    throw InvalidArgument(
        "concentration_violation_rate: for n < d rows need norm exactly sqrt(d); use isotropic_rademacher");
  }
  if (trials < 1) throw InvalidArgument("concentration_violation_rate: trials must be >= 1");

  ConcentrationReport r;
  r.trials = trials;
  r.lower_bound = bai_yin_lower_bound(1.0, K, n, d, x);
  r.allowed = 2.0 * std::exp(-x);
  r.slack_limit = r.allowed + 3.0 * std::sqrt(r.allowed / static_cast<double>(trials));
  std::vector<double> lambdas(static_cast<std::size_t>(trials));
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(t)});
    const Matrix xs = sample_inputs(dist, n, d, rng);
    const double l = linalg::covariance_spectrum(xs).lambda_min_plus;
    lambdas[static_cast<std::size_t>(t)] = l;
    if (l < r.lower_bound) ++r.violations;
  }
  r.lambda_min_plus_mean = summarize(lambdas).mean;
  r.rate = static_cast<double>(r.violations) / static_cast<double>(trials);
  r.within_limit = r.rate <= r.slack_limit;
  return r;
}

AsymptoticFactor asymptotic_optimization_factor(double alpha, Index n, Index d, std::int64_t T) {
  if (!(alpha >= 0.0) || T < 0) throw InvalidArgument("asymptotic_optimization_factor: need alpha, T >= 0");
  if (n < 1 || d < 1) throw InvalidArgument("asymptotic_optimization_factor: n and d must be >= 1");
  const double sn = std::sqrt(static_cast<double>(n));
  const double sd = std::sqrt(static_cast<double>(d));
  const double gap = d >= n ? positive_part(sd - sn - 1.0) : positive_part(sn - sd - 1.0);
  AsymptoticFactor f;
  f.inner = 1.0 - alpha / static_cast<double>(n) * gap * gap;
  f.value = std::pow(f.inner, 2.0 * static_cast<double>(T));
  if (f.inner < 0.0) {
    std::ostringstream msg;
    msg << "inner factor " << f.inner << " < 0: step size too large for the asymptotic proxy";
    f.warning = msg.str();
  }
  return f;
}

TailProjectionBound tail_projection_bound(const linalg::SpectrumSummary& spectrum, double wstar_norm, Index n,
                                          double delta) {
  if (n < 1) throw InvalidArgument("tail_projection_bound: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("tail_projection_bound: delta must be in (0, 1)");
  if (spectrum.rank < 1 || spectrum.tail_sums.size() < static_cast<std::size_t>(spectrum.rank) + 1) {
    throw InvalidArgument("tail_projection_bound: malformed spectrum summary");
  }
  const double nn = static_cast<double>(n);
  const double root = std::sqrt(2.0 / nn);
  TailProjectionBound b;
  b.min_term = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= spectrum.rank; ++k) {
    const double term =
        spectrum.tail_sums[static_cast<std::size_t>(k)] / nn + (1.0 + std::sqrt(static_cast<double>(k))) * root;
    if (term < b.min_term) {
      b.min_term = term;
      b.argmin_k = k;
    }
  }
  b.confidence_term = wstar_norm * wstar_norm * std::sqrt(18.0 / nn * std::log(2.0 * nn / delta));
  b.total = b.min_term + b.confidence_term;
  return b;
}

}  // namespace ddlab
