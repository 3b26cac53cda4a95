#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "kasync/config.hpp"
#include "kasync/metrics.hpp"
#include "kasync/server.hpp"

namespace kasync {

/// In-memory result of one run, before any file is written.
struct RunArtifacts {
  MetricsLog log;
  ModelSpec model;
  std::optional<double> final_accuracy;
  double tau_ave = 0.0;
  double n_ave = 0.0;
  std::optional<double> stability;
};

/// Builds datasets, shards, clients and the chosen server, then executes the run.
RunArtifacts execute_run(const ExperimentConfig& cfg);

std::unique_ptr<ServerAlgorithm> make_server(const AlgorithmConfig& alg, int k, int total_clients,
                                             ParamVector initial_params);

/// Deterministic initial parameters (zeros for logistic, symmetric uniform
/// fan-in scaling for the mlp layers).
ParamVector initial_params(const ModelSpec& spec, std::uint64_t seed);

/// Runs and writes <out>/config.json, metrics.csv, weights.csv, summary.json.
void run_experiment(const ExperimentConfig& cfg, const nlohmann::json& config_echo,
                    const std::filesystem::path& out_dir);

/// One run directory per (pk, labels, variant, seed) cell plus sweep_summary.csv.
void run_sweep(const SweepConfig& sweep, const std::filesystem::path& out_dir, int parallel = 1);

/// SVG charts (plus CSV sidecars of the plotted points) for a run or sweep directory.
void emit_plots(const std::filesystem::path& dir);

/// Writes the shard composition of the configured partition for inspection.
void dump_partition(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace kasync
