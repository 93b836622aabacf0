#pragma once

#include "ddlab/config.hpp"
#include "ddlab/csv.hpp"
#include "ddlab/linalg.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ddlab {

struct RunOptions {
  std::uint64_t master_seed = 0;
  int workers = 1;
};

/// One (sweep value, seed, horizon) cell of a least-squares sweep.
struct SweepRecord {
  std::string sweep_name;
  double sweep_value = 0.0;
  std::int64_t seed = 0;
  std::int64_t T = 0;
  double excess_risk = 0.0;
  double excess_risk_se = 0.0;
  double lambda_min_plus = 0.0;
  double bound_term_optimization = 0.0;
  double bound_term_noise = 0.0;
  double bound_term_complement = 0.0;
  double bound_total = 0.0;
  std::optional<Index> test_error;
  std::string config_hash;
};

/// Per-cell seed: hash of (master seed, subcommand, sweep value key, seed index).
std::uint64_t cell_seed(std::uint64_t master_seed, std::string_view subcommand, std::uint64_t sweep_key,
                        std::int64_t seed_index);

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Exceptions
/// escaping fn are rethrown after all workers finish.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// CSV columns of a subcommand, in output order.
const std::vector<std::string>& subcommand_columns(std::string_view subcommand);

CsvTable run_fig1(const Config& config, const RunOptions& options);
CsvTable run_fig6(const Config& config, const RunOptions& options);
CsvTable run_sweep_ls(const Config& config, const RunOptions& options);
CsvTable run_sweep_mlp(const Config& config, const RunOptions& options);
CsvTable run_concentration(const Config& config, const RunOptions& options);

CsvTable run_subcommand(std::string_view subcommand, const Config& config, const RunOptions& options);

/// Resolved configuration written next to a run's CSV.
Config run_sidecar(std::string_view subcommand, const Config& config, const RunOptions& options);

}  // namespace ddlab
