// Command-line front end for the experiment sweeps.

#include "ddlab/config.hpp"
#include "ddlab/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

std::string column_footer(const std::string& sub) {
  std::string s = "CSV columns:";
  for (const auto& c : ddlab::subcommand_columns(sub)) s += " " + c;
  s += "\nConfig keys (defaults):\n" + ddlab::default_config(sub).dump(2);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-descent laboratory: least-squares GD excess risk, spectral bounds and MLP feature spectra"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_path;
  int workers = 1;
  std::vector<std::string> overrides;

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"fig1", "excess risk, bound and optimization error over a d sweep at fixed n"},
      {"fig6", "tail-projection bound min-term vs n for unit-sphere inputs with d = d_factor * n"},
      {"sweep-ls", "least-squares d sweep across label-noise levels"},
      {"sweep-mlp", "MLP width sweep on MNIST: test error and feature-spectrum probes"},
      {"concentration", "violation rate of the non-asymptotic smallest-eigenvalue lower bound"},
  };
  for (const auto& [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "flat JSON config file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_path, "output CSV path (stdout when omitted)");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--set", overrides, "override a config key: key=value (repeatable)");
    sub->footer(column_footer(name));
  }

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    std::optional<std::filesystem::path> file;
    if (!config_path.empty()) file = config_path;
    const ddlab::Config config = ddlab::resolve_config(name, file, overrides);
    const ddlab::RunOptions options{seed, workers};
    const std::string csv = ddlab::run_subcommand(name, config, options).str();
    const std::string sidecar = ddlab::run_sidecar(name, config, options).dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << csv;
    } else {
      std::ofstream(out_path, std::ios::binary) << csv;
      std::ofstream(out_path + ".config.json", std::ios::binary) << sidecar;
      std::cerr << "wrote " << out_path << " and " << out_path << ".config.json\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
