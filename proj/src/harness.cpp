#include "ddlab/harness.hpp"

#include "ddlab/bounds.hpp"
#include "ddlab/error.hpp"
#include "ddlab/idx.hpp"
#include "ddlab/mlp.hpp"
#include "ddlab/risk.hpp"
#include "ddlab/rng.hpp"
#include "ddlab/samplers.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

namespace ddlab {

namespace {

template <typename T>
T get(const Config& config, const char* key) {
  if (!config.contains(key)) throw InvalidArgument(std::string("missing config key '") + key + "'");
  try {
    return config.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config key '") + key + "' has the wrong type: " + e.what());
  }
}

std::string num(double v) { return format_double(v); }
std::string num(std::int64_t v) { return std::to_string(v); }

std::string error_status(const std::exception& e) { return std::string("error: ") + e.what(); }

// Rows produced by one cell; cells are concatenated in index order.
using Rows = std::vector<std::vector<std::string>>;

CsvTable collect(std::string_view subcommand, std::size_t cells, int workers,
                 const std::function<Rows(std::size_t)>& cell) {
  std::vector<Rows> results(cells);
  parallel_for(cells, workers, [&](std::size_t i) { results[i] = cell(i); });
  CsvTable table;
  table.header = subcommand_columns(subcommand);
  for (Rows& r : results) {
    for (auto& row : r) {
      if (row.size() != table.header.size()) throw Error("internal: row width does not match header");
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::vector<Index> d_grid(const Config& config) {
  const auto lo = get<Index>(config, "d_min");
  const auto hi = get<Index>(config, "d_max");
  const auto step = get<Index>(config, "d_step");
  if (lo < 1 || hi < lo || step < 1) throw InvalidArgument("d grid needs 1 <= d_min <= d_max and d_step >= 1");
  std::vector<Index> ds;
  for (Index d = lo; d <= hi; d += step) ds.push_back(d);
  return ds;
}

std::vector<std::int64_t> horizons_of(const Config& config) {
  auto hs = get<std::vector<std::int64_t>>(config, "horizons");
  if (hs.empty()) throw InvalidArgument("horizons must not be empty");
  for (auto T : hs) {
    if (T < 0) throw InvalidArgument("horizons must be >= 0");
  }
  return hs;
}

// Shared setup of the least-squares sweeps.
struct LsSetup {
  Index n;
  Index d_max;
  double alpha;
  double init_scale;
  double wstar_norm;
  InputDistribution dist;
  Index holdout;
  std::int64_t draws;
  std::int64_t inits;
  std::int64_t seeds;
  std::vector<std::int64_t> horizons;
  std::vector<Index> ds;

  explicit LsSetup(const Config& c)
      : n(get<Index>(c, "n")),
        alpha(get<double>(c, "alpha")),
        init_scale(get<double>(c, "init_variance_scale")),
        wstar_norm(get<double>(c, "wstar_norm")),
        dist(parse_input_distribution(get<std::string>(c, "input_dist"))),
        holdout(get<Index>(c, "holdout_size")),
        draws(get<std::int64_t>(c, "n_sample_draws")),
        inits(get<std::int64_t>(c, "n_init_draws")),
        seeds(get<std::int64_t>(c, "seeds")),
        horizons(horizons_of(c)),
        ds(d_grid(c)) {
    d_max = ds.back();
    if (n < 1) throw InvalidArgument("n must be >= 1");
    if (seeds < 1) throw InvalidArgument("seeds must be >= 1");
  }

  ProblemSpec spec(Index d, double sigma, std::uint64_t master_seed) const {
    return ProblemSpec{n, d, dist, sweep_wstar(d, d_max, wstar_norm, master_seed), sigma};
  }
  double init_variance(Index d) const { return init_scale / static_cast<double>(d); }
  RiskEvaluation evaluation(Index d) const {
    return holdout > 0 ? RiskEvaluation::holdout(holdout) : RiskEvaluation::analytic(dist, d);
  }
};

std::vector<Index> variant_widths(const std::string& variant, Index width, Index bottleneck, bool& skip) {
  skip = false;
  if (variant == "depth1") return {width};
  if (variant == "depth3_wide") return {width, width, width};
  if (variant == "depth3_bottleneck") return {bottleneck, bottleneck, width};
  if (variant == "depth3_skip") {
    skip = true;
    return {width, width, width};
  }
  throw InvalidArgument("unknown MLP variant '" + variant + "'");
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t master_seed, std::string_view subcommand, std::uint64_t sweep_key,
                        std::int64_t seed_index) {
  return derive_seed(master_seed, {hash_string(subcommand), sweep_key, static_cast<std::uint64_t>(seed_index)});
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

const std::vector<std::string>& subcommand_columns(std::string_view subcommand) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> columns = {
      {"fig1",
       {"d", "seed", "T", "excess_risk", "excess_risk_se", "optimization_error", "optimization_error_se",
        "lambda_min_plus", "bound_term_optimization", "bound_term_noise", "bound_term_complement", "bound_total",
        "bound_total_se", "status", "config_hash"}},
      {"sweep-ls",
       {"d", "sigma", "seed", "T", "excess_risk", "excess_risk_se", "lambda_min_plus", "bound_term_optimization",
        "bound_term_noise", "bound_term_complement", "bound_total", "bound_excluded_trials", "status",
        "config_hash"}},
      {"fig6",
       {"n", "d", "seed", "rank", "lambda_min_plus", "min_term", "argmin_k", "confidence_term", "total", "status",
        "config_hash"}},
      {"concentration",
       {"n", "d", "x", "dist", "K", "trials", "lower_bound", "violations", "rate", "allowed", "slack_limit",
        "within_limit", "lambda_min_plus_mean", "status", "config_hash"}},
      {"sweep-mlp",
       {"variant", "width", "seed", "iteration", "test_error", "train_loss", "lambda_min_plus", "lambda_max",
        "condition_number", "rank", "status", "config_hash"}},
  };
  const auto it = columns.find(subcommand);
  if (it == columns.end()) throw InvalidArgument("unknown subcommand '" + std::string(subcommand) + "'");
  return it->second;
}

CsvTable run_fig1(const Config& config, const RunOptions& options) {
  const LsSetup setup(config);
  const double sigma = get<double>(config, "sigma");
  const std::string hash = config_hash(config);
  const std::size_t seeds = static_cast<std::size_t>(setup.seeds);
  const std::size_t cells = setup.ds.size() * seeds;

  return collect("fig1", cells, options.workers, [&](std::size_t cell) -> Rows {
    const Index d = setup.ds[cell / seeds];
    const auto s = static_cast<std::int64_t>(cell % seeds);
    Rows rows;
    try {
      const ProblemSpec spec = setup.spec(d, sigma, options.master_seed);
      const double nu2 = setup.init_variance(d);
      const std::uint64_t seed = cell_seed(options.master_seed, "fig1", static_cast<std::uint64_t>(d), s);
      const auto excess =
          excess_risk_mc(spec, setup.alpha, nu2, setup.horizons, setup.draws, setup.inits, seed, setup.evaluation(d));
      const auto opt = optimization_error_mc(spec, setup.alpha, nu2, setup.horizons, setup.draws, seed);
      const auto bound = bound_reports(spec, setup.alpha, nu2, setup.horizons, setup.draws, seed);
      for (std::size_t h = 0; h < setup.horizons.size(); ++h) {
        rows.push_back({num(std::int64_t{d}), num(s), num(setup.horizons[h]), num(excess[h].mean),
                        num(excess[h].std_error), num(opt[h].mean), num(opt[h].std_error),
                        num(bound[h].lambda_min_plus_mean), num(bound[h].optimization.value),
                        num(bound[h].noise.value), num(bound[h].complement.value), num(bound[h].total),
                        num(bound[h].total_std_error), "ok", hash});
      }
    } catch (const std::exception& e) {
      rows.clear();
      for (auto T : setup.horizons) {
        std::vector<std::string> row(subcommand_columns("fig1").size());
        row[0] = num(std::int64_t{d});
        row[1] = num(s);
        row[2] = num(T);
        row[row.size() - 2] = error_status(e);
        row.back() = hash;
        rows.push_back(std::move(row));
      }
    }
    return rows;
  });
}

CsvTable run_sweep_ls(const Config& config, const RunOptions& options) {
  const LsSetup setup(config);
  const auto sigmas = get<std::vector<double>>(config, "sigmas");
  if (sigmas.empty()) throw InvalidArgument("sigmas must not be empty");
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw InvalidArgument("sigmas must be >= 0");
  }
  const std::string hash = config_hash(config);
  const std::size_t seeds = static_cast<std::size_t>(setup.seeds);
  const std::size_t cells = setup.ds.size() * seeds;

  // Seeds exclude sigma: every noise level sees the same inputs, noise
  // directions and initializations.
  return collect("sweep-ls", cells, options.workers, [&](std::size_t cell) -> Rows {
    const Index d = setup.ds[cell / seeds];
    const auto s = static_cast<std::int64_t>(cell % seeds);
    const std::uint64_t seed = cell_seed(options.master_seed, "sweep-ls", static_cast<std::uint64_t>(d), s);
    const double nu2 = setup.init_variance(d);
    Rows rows;
    for (double sigma : sigmas) {
      try {
        const ProblemSpec spec = setup.spec(d, sigma, options.master_seed);
        const auto excess = excess_risk_mc(spec, setup.alpha, nu2, setup.horizons, setup.draws, setup.inits, seed,
                                           setup.evaluation(d));
        const auto bound = bound_reports(spec, setup.alpha, nu2, setup.horizons, setup.draws, seed);
        for (std::size_t h = 0; h < setup.horizons.size(); ++h) {
          rows.push_back({num(std::int64_t{d}), num(sigma), num(s), num(setup.horizons[h]), num(excess[h].mean),
                          num(excess[h].std_error), num(bound[h].lambda_min_plus_mean),
                          num(bound[h].optimization.value), num(bound[h].noise.value),
                          num(bound[h].complement.value), num(bound[h].total), num(bound[h].excluded_trials),
                          "ok", hash});
        }
      } catch (const std::exception& e) {
        for (auto T : setup.horizons) {
          std::vector<std::string> row(subcommand_columns("sweep-ls").size());
          row[0] = num(std::int64_t{d});
          row[1] = num(sigma);
          row[2] = num(s);
          row[3] = num(T);
          row[row.size() - 2] = error_status(e);
          row.back() = hash;
          rows.push_back(std::move(row));
        }
      }
    }
    return rows;
  });
}

CsvTable run_fig6(const Config& config, const RunOptions& options) {
  const auto i_min = get<int>(config, "i_min");
  const auto i_max = get<int>(config, "i_max");
  const auto d_factor = get<Index>(config, "d_factor");
  const auto seeds = get<std::int64_t>(config, "seeds");
  const auto wstar_norm = get<double>(config, "wstar_norm");
  const auto delta = get<double>(config, "delta");
  if (i_min < 0 || i_max < i_min || i_max > 20) throw InvalidArgument("fig6 needs 0 <= i_min <= i_max <= 20");
  if (d_factor < 1 || seeds < 1) throw InvalidArgument("fig6 needs d_factor >= 1 and seeds >= 1");
  const std::string hash = config_hash(config);
  const auto per_n = static_cast<std::size_t>(seeds);
  const std::size_t cells = static_cast<std::size_t>(i_max - i_min + 1) * per_n;

  return collect("fig6", cells, options.workers, [&](std::size_t cell) -> Rows {
    const Index n = Index{1} << (i_min + static_cast<int>(cell / per_n));
    const Index d = d_factor * n;
    const auto s = static_cast<std::int64_t>(cell % per_n);
    try {
      Rng rng(cell_seed(options.master_seed, "fig6", static_cast<std::uint64_t>(n), s));
      const Matrix x = sample_unit_sphere(n, d, rng);
      const linalg::SpectrumSummary spectrum = linalg::covariance_spectrum(x);
      const TailProjectionBound b = tail_projection_bound(spectrum, wstar_norm, n, delta);
      return {{num(std::int64_t{n}), num(std::int64_t{d}), num(s), num(std::int64_t{spectrum.rank}),
               num(spectrum.lambda_min_plus), num(b.min_term), num(std::int64_t{b.argmin_k}),
               num(b.confidence_term), num(b.total), "ok", hash}};
    } catch (const std::exception& e) {
      std::vector<std::string> row(subcommand_columns("fig6").size());
      row[0] = num(std::int64_t{n});
      row[1] = num(std::int64_t{d});
      row[2] = num(s);
      row[row.size() - 2] = error_status(e);
      row.back() = hash;
      return {row};
    }
  });
}

CsvTable run_concentration(const Config& config, const RunOptions& options) {
  const auto shapes = get<std::vector<std::vector<Index>>>(config, "shapes");
  const auto xs = get<std::vector<double>>(config, "xs");
  const auto dists = get<std::vector<std::string>>(config, "dists");
  const auto trials = get<std::int64_t>(config, "trials");
  std::optional<double> k_override;
  if (!config.at("K").is_null()) k_override = get<double>(config, "K");
  for (const auto& s : shapes) {
    if (s.size() != 2) throw InvalidArgument("shapes entries must be [n, d] pairs");
  }
  const std::string hash = config_hash(config);
  const std::size_t cells = shapes.size() * xs.size() * dists.size();

  return collect("concentration", cells, options.workers, [&](std::size_t cell) -> Rows {
    const std::size_t di = cell % dists.size();
    const std::size_t xi = (cell / dists.size()) % xs.size();
    const std::size_t si = cell / (dists.size() * xs.size());
    const Index n = shapes[si][0];
    const Index d = shapes[si][1];
    const double x = xs[xi];
    const std::string& dist_name = dists[di];
    std::vector<std::string> row(subcommand_columns("concentration").size());
    row[0] = num(std::int64_t{n});
    row[1] = num(std::int64_t{d});
    row[2] = num(x);
    row[3] = dist_name;
    row.back() = hash;
    try {
      const InputDistribution dist = parse_input_distribution(dist_name);
      const std::optional<double> K = k_override ? k_override : analytic_subgaussian_constant(dist);
      if (!K) throw InvalidArgument("no analytic sub-Gaussian constant for " + dist_name + "; set K");
      const std::uint64_t key =
          derive_seed(static_cast<std::uint64_t>(n), {static_cast<std::uint64_t>(d), double_key(x),
                                                      hash_string(dist_name)});
      const ConcentrationReport r =
          concentration_violation_rate(dist, n, d, x, *K, trials, cell_seed(options.master_seed, "concentration", key, 0));
      row[4] = num(*K);
      row[5] = num(r.trials);
      row[6] = num(r.lower_bound);
      row[7] = num(r.violations);
      row[8] = num(r.rate);
      row[9] = num(r.allowed);
      row[10] = num(r.slack_limit);
      row[11] = r.within_limit ? "true" : "false";
      row[12] = num(r.lambda_min_plus_mean);
      row[13] = "ok";
    } catch (const std::exception& e) {
      row[13] = error_status(e);
    }
    return {row};
  });
}

CsvTable run_sweep_mlp(const Config& config, const RunOptions& options) {
  const std::filesystem::path train_images = get<std::string>(config, "train_images");
  const std::filesystem::path train_labels = get<std::string>(config, "train_labels");
  const std::filesystem::path test_images = get<std::string>(config, "test_images");
  const std::filesystem::path test_labels = get<std::string>(config, "test_labels");
  std::string missing;
  for (const auto* p : {&train_images, &train_labels, &test_images, &test_labels}) {
    if (!std::filesystem::exists(*p)) missing += "\n  " + p->string();
  }
  if (!missing.empty()) {
    throw InvalidArgument(
        "sweep-mlp: MNIST IDX files not found. Expected (uncompressed) files at:" + missing +
        "\nPoint train_images/train_labels/test_images/test_labels at them with --set or the config file.");
  }
  const auto widths = get<std::vector<Index>>(config, "widths");
  const auto variants = get<std::vector<std::string>>(config, "variants");
  const auto bottleneck = get<Index>(config, "bottleneck_width");
  const auto n_train = get<Index>(config, "n_train");
  const auto test_size = get<Index>(config, "test_subset_size");
  const auto seeds = get<std::int64_t>(config, "seeds");
  const auto probes = get<std::vector<std::int64_t>>(config, "probes");

  MlpConfig base;
  base.alpha = get<double>(config, "alpha");
  base.T = get<std::int64_t>(config, "T");
  base.train_subset_size = n_train;
  base.probe_schedule = probes;
  base.center_features = get<bool>(config, "center_features");
  if (seeds < 1) throw InvalidArgument("seeds must be >= 1");

  const ImageSet train_full = load_idx(train_images, train_labels);
  ImageSet test = load_idx(test_images, test_labels);
  if (test_size > 0) test = subset_dataset(test, test_size, derive_seed(options.master_seed, {hash_string("test")}));
  // One training subset per seed, shared by every width and variant.
  std::vector<ImageSet> train_subsets;
  for (std::int64_t s = 0; s < seeds; ++s) {
    train_subsets.push_back(subset_dataset(
        train_full, n_train, derive_seed(options.master_seed, {hash_string("train"), static_cast<std::uint64_t>(s)})));
  }

  const std::string hash = config_hash(config);
  const std::size_t per_variant = widths.size() * static_cast<std::size_t>(seeds);
  const std::size_t cells = variants.size() * per_variant;
  return collect("sweep-mlp", cells, options.workers, [&](std::size_t cell) -> Rows {
    const std::string& variant = variants[cell / per_variant];
    const Index width = widths[(cell % per_variant) / static_cast<std::size_t>(seeds)];
    const auto s = static_cast<std::int64_t>(cell % static_cast<std::size_t>(seeds));
    Rows rows;
    try {
      MlpConfig cfg = base;
      cfg.layer_widths = variant_widths(variant, width, bottleneck, cfg.skip_connections);
      const std::uint64_t key = derive_seed(hash_string(variant), {static_cast<std::uint64_t>(width)});
      Rng rng(cell_seed(options.master_seed, "sweep-mlp", key, s));
      for (const MlpProbe& p : mlp_gd_train(cfg, train_subsets[static_cast<std::size_t>(s)], test, rng)) {
        rows.push_back({variant, num(std::int64_t{width}), num(s), num(p.iteration),
                        num(std::int64_t{p.test_error}), num(p.train_loss), num(p.penultimate_spectrum.lambda_min_plus),
                        num(p.penultimate_spectrum.lambda_max), num(p.penultimate_spectrum.condition_number),
                        num(std::int64_t{p.penultimate_spectrum.rank}), "ok", hash});
      }
    } catch (const std::exception& e) {
      rows.clear();
      std::vector<std::string> row(subcommand_columns("sweep-mlp").size());
      row[0] = variant;
      row[1] = num(std::int64_t{width});
      row[2] = num(s);
      row[row.size() - 2] = error_status(e);
      row.back() = hash;
      rows.push_back(std::move(row));
    }
    return rows;
  });
}

CsvTable run_subcommand(std::string_view subcommand, const Config& config, const RunOptions& options) {
  if (subcommand == "fig1") return run_fig1(config, options);
  if (subcommand == "fig6") return run_fig6(config, options);
  if (subcommand == "sweep-ls") return run_sweep_ls(config, options);
  if (subcommand == "sweep-mlp") return run_sweep_mlp(config, options);
  if (subcommand == "concentration") return run_concentration(config, options);
  throw InvalidArgument("unknown subcommand '" + std::string(subcommand) + "'");
}

Config run_sidecar(std::string_view subcommand, const Config& config, const RunOptions& options) {
  Config side;
  side["subcommand"] = std::string(subcommand);
  side["master_seed"] = options.master_seed;
  side["config"] = config;
  side["config_hash"] = config_hash(config);
  side["columns"] = subcommand_columns(subcommand);
  side["notes"] = {
      {"activation", "relu"},
      {"optimization_error", "contraction-factor term of the noiseless bound: E[(1-a*l)^(2T)] (|w*|^2 + nu^2 (2+d))"},
      {"init_variance", "nu^2 = init_variance_scale / d"},
  };
  return side;
}

}  // namespace ddlab
