#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kasync/datagen.hpp"
#include "kasync/model.hpp"
#include "kasync/simulator.hpp"

namespace kasync {

struct DatasetConfig {
  enum class Type { synth, idx };
  Type type = Type::synth;
  // synth
  int classes = 2;
  int dim = 2;
  int per_class = 100;
  int test_per_class = 0;  // 0: no test set, no accuracy curve
  double separation = 1.0;
  // idx
  std::string train_images, train_labels;
  std::string test_images, test_labels;  // optional
};

struct LatencyConfig {
  LatencyModel::Kind kind = LatencyModel::Kind::shifted_exponential;
  double shift = 0.0;
  double rate = 1.0;
  double rate_spread_decades = 1.0;  // per-client log-uniform rate spread
  double mu = 0.0;
  double sigma = 1.0;
  double value = 1.0;
};

struct AlgorithmConfig {
  std::string variant = "wkafl";  // wkafl|twafl|sasgd|gsgm|kavg|expmom
  double eta0 = 0.5;
  // wkafl
  double alpha = 0.5;
  double beta = 2.0;
  double sim_min = 0.3;
  double gamma = 0.1;
  double clip_ratio = 4.0;
  double clip_bound = 10.0;
  std::optional<double> epsilon;  // defaults to 0.3 * k
  // gsgm
  double gsgm_momentum = 0.9;
  // expmom
  double expmom_alpha = 0.5;
  double expmom_sharpness = 0.30685281944005469;  // log(e/2)
};

struct ExperimentConfig {
  std::uint64_t seed = 0;  // required in config files, never defaulted
  long iterations = 1;
  int k = 1;
  long eval_every = 25;
  double mu = 10.0;  // threshold ratio for the aggregated-gradient count
  int a_num = 10;    // window for the training-stability metric
  ModelKind model_kind = ModelKind::logistic;
  int hidden_dim = 16;
  DatasetConfig dataset;
  PartitionSpec partition;  // partition.seed is derived from the run seed
  int batch_size = 16;
  LatencyConfig latency;
  AlgorithmConfig algorithm;
};

/// Parses and validates; throws ConfigError naming the offending field path.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

struct SweepConfig {
  nlohmann::json base;                      // a full experiment config
  std::vector<std::pair<int, int>> pk;      // (clients, k) cells
  std::vector<int> labels_per_client;
  std::vector<std::string> variants;
  std::vector<std::uint64_t> seeds;
};

SweepConfig parse_sweep_config(const nlohmann::json& j);

}  // namespace kasync
