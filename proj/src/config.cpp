#include "ddlab/config.hpp"

#include "ddlab/error.hpp"
#include "ddlab/rng.hpp"

#include <cstdio>
#include <fstream>

namespace ddlab {

namespace {

Config fig1_defaults() {
  return Config{
      {"n", 20},
      {"d_min", 1},
      {"d_max", 100},
      {"d_step", 1},
      {"alpha", 0.05},
      {"init_variance_scale", 1.0},
      {"sigma", 0.0},
      {"horizons", {100, 1000, 10000}},
      {"seeds", 10},
      {"n_sample_draws", 20},
      {"n_init_draws", 10},
      {"wstar_norm", 1.0},
      {"input_dist", "truncated_normal_ball"},
      {"holdout_size", 0},
  };
}

Config sweep_ls_defaults() {
  Config c = fig1_defaults();
  c.erase("sigma");
  c["sigmas"] = {0.0, 0.25, 0.5};
  c["horizons"] = {1000};
  return c;
}

Config fig6_defaults() {
  return Config{
      {"i_min", 1}, {"i_max", 10}, {"d_factor", 10}, {"seeds", 1}, {"wstar_norm", 1.0}, {"delta", 0.05},
  };
}

Config concentration_defaults() {
  return Config{
      {"shapes", {{400, 20}, {20, 400}}},
      {"xs", {1.0, 2.0}},
      {"dists", {"isotropic_rademacher"}},
      {"K", nullptr},
      {"trials", 500},
  };
}

Config sweep_mlp_defaults() {
  return Config{
      {"train_images", "data/mnist/train-images-idx3-ubyte"},
      {"train_labels", "data/mnist/train-labels-idx1-ubyte"},
      {"test_images", "data/mnist/t10k-images-idx3-ubyte"},
      {"test_labels", "data/mnist/t10k-labels-idx1-ubyte"},
      {"widths", {64, 256, 1024}},
      {"variants", {"depth1", "depth3_wide", "depth3_bottleneck", "depth3_skip"}},
      {"bottleneck_width", 16},
      {"n_train", 256},
      {"test_subset_size", 0},
      {"seeds", 1},
      {"alpha", 0.01},
      {"T", 200},
      {"probes", {0, 100, 200}},
      {"center_features", false},
  };
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"fig1", "fig6", "sweep-ls", "sweep-mlp", "concentration"};
  return names;
}

Config default_config(std::string_view subcommand) {
  if (subcommand == "fig1") return fig1_defaults();
  if (subcommand == "fig6") return fig6_defaults();
  if (subcommand == "sweep-ls") return sweep_ls_defaults();
  if (subcommand == "sweep-mlp") return sweep_mlp_defaults();
  if (subcommand == "concentration") return concentration_defaults();
  throw InvalidArgument("unknown subcommand '" + std::string(subcommand) + "'");
}

void apply_override(Config& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidArgument("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  if (!config.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
  Config value = Config::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  config[key] = std::move(value);
}

Config resolve_config(std::string_view subcommand, const std::optional<std::filesystem::path>& file,
                      const std::vector<std::string>& overrides) {
  Config config = default_config(subcommand);
  if (file) {
    std::ifstream in(*file);
    if (!in) throw InvalidArgument("cannot open config file " + file->string());
    Config loaded = Config::parse(in, nullptr, false);
    if (loaded.is_discarded() || !loaded.is_object()) {
      throw InvalidArgument("config file " + file->string() + " is not a JSON object");
    }
    for (auto it = loaded.begin(); it != loaded.end(); ++it) {
      if (!config.contains(it.key())) throw InvalidArgument("unknown config key '" + it.key() + "'");
      config[it.key()] = it.value();
    }
  }
  for (const std::string& o : overrides) apply_override(config, o);
  return config;
}

std::string config_hash(const Config& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(config.dump())));
  return buf;
}

}  // namespace ddlab
