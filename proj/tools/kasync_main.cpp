#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kasync/config.hpp"
#include "kasync/errors.hpp"
#include "kasync/experiment.hpp"
#include "kasync/io.hpp"

namespace {

int dispatch(int argc, char** argv) {
  CLI::App app{"K-async federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, plot_dir;
  int parallel = 1;

  auto* run = app.add_subcommand("run", "Execute one experiment");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Execute a grid of experiments");
  sweep->add_option("--config", config_path, "Sweep config (JSON)")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--parallel", parallel, "Worker threads for sweep cells");

  auto* plot = app.add_subcommand("plot", "Render SVG charts for a run or sweep directory");
  plot->add_option("dir", plot_dir, "Run or sweep directory")->required();

  auto* partition = app.add_subcommand("partition", "Dump the configured shards for inspection");
  partition->add_option("--config", config_path, "Experiment config (JSON)")->required();
  partition->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    const auto j = kasync::load_json_file(config_path);
    const auto cfg = kasync::parse_experiment_config(j);
    kasync::run_experiment(cfg, j, out_dir);
  } else if (sweep->parsed()) {
    const auto j = kasync::load_json_file(config_path);
    const auto cfg = kasync::parse_sweep_config(j);
    kasync::run_sweep(cfg, out_dir, parallel);
  } else if (plot->parsed()) {
    kasync::emit_plots(plot_dir);
  } else if (partition->parsed()) {
    const auto j = kasync::load_json_file(config_path);
    const auto cfg = kasync::parse_experiment_config(j);
    kasync::dump_partition(cfg, out_dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const kasync::ConfigError& e) {
    kasync::log_error(e.what());
    return 2;
  } catch (const kasync::UsageError& e) {
    kasync::log_error(e.what());
    return 2;
  } catch (const kasync::FormatError& e) {
    kasync::log_error(e.what());
    return 2;
  } catch (const kasync::NumericError& e) {
    kasync::log_error(e.what());
    return 3;
  } catch (const std::exception& e) {
    kasync::log_error(e.what());
    return 1;
  }
}
