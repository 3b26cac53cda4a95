#include "kasync/config.hpp"

#include <fstream>
#include <set>

#include "kasync/errors.hpp"

namespace kasync {

using nlohmann::json;

namespace {

const json* find_path(const json& root, const std::string& path) {
  const json* cur = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

template <typename T>
T req(const json& root, const std::string& path) {
  const json* v = find_path(root, path);
  if (v == nullptr) throw ConfigError("config: missing field '" + path + "'");
  try {
    return v->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: invalid value for field '" + path + "'");
  }
}

template <typename T>
T opt(const json& root, const std::string& path, T def) {
  const json* v = find_path(root, path);
  if (v == nullptr) return def;
  try {
    return v->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: invalid value for field '" + path + "'");
  }
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
}

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  cfg.seed = req<std::uint64_t>(j, "seed");
  cfg.iterations = req<long>(j, "iterations");
  cfg.k = req<int>(j, "k");
  cfg.eval_every = opt<long>(j, "eval_every", 25);
  cfg.mu = opt<double>(j, "mu", 10.0);
  cfg.a_num = opt<int>(j, "a_num", 10);

  const auto kind = opt<std::string>(j, "model.kind", "logistic");
  if (kind == "logistic") cfg.model_kind = ModelKind::logistic;
  else if (kind == "mlp") cfg.model_kind = ModelKind::mlp;
  else throw ConfigError("config: invalid value for field 'model.kind'");
  cfg.hidden_dim = opt<int>(j, "model.hidden_dim", 16);

  const auto dtype = req<std::string>(j, "dataset.type");
  if (dtype == "synth") {
    cfg.dataset.type = DatasetConfig::Type::synth;
    cfg.dataset.classes = req<int>(j, "dataset.classes");
    cfg.dataset.dim = req<int>(j, "dataset.dim");
    cfg.dataset.per_class = req<int>(j, "dataset.per_class");
    cfg.dataset.test_per_class = opt<int>(j, "dataset.test_per_class", 0);
    cfg.dataset.separation = req<double>(j, "dataset.separation");
  } else if (dtype == "idx") {
    cfg.dataset.type = DatasetConfig::Type::idx;
    cfg.dataset.train_images = req<std::string>(j, "dataset.train_images");
    cfg.dataset.train_labels = req<std::string>(j, "dataset.train_labels");
    cfg.dataset.test_images = opt<std::string>(j, "dataset.test_images", "");
    cfg.dataset.test_labels = opt<std::string>(j, "dataset.test_labels", "");
  } else {
    throw ConfigError("config: invalid value for field 'dataset.type'");
  }

  cfg.partition.clients = req<int>(j, "partition.clients");
  cfg.partition.labels_per_client = req<int>(j, "partition.labels_per_client");
  cfg.partition.min_samples = req<int>(j, "partition.min_samples");
  cfg.partition.max_samples = req<int>(j, "partition.max_samples");

  cfg.batch_size = req<int>(j, "batch_size");

  const auto ltype = opt<std::string>(j, "latency.type", "shifted_exponential");
  if (ltype == "shifted_exponential") {
    cfg.latency.kind = LatencyModel::Kind::shifted_exponential;
    cfg.latency.shift = opt<double>(j, "latency.shift", 0.0);
    cfg.latency.rate = opt<double>(j, "latency.rate", 1.0);
    cfg.latency.rate_spread_decades = opt<double>(j, "latency.rate_spread_decades", 1.0);
    if (cfg.latency.shift < 0.0) throw ConfigError("config: invalid value for field 'latency.shift'");
    if (cfg.latency.rate <= 0.0) throw ConfigError("config: invalid value for field 'latency.rate'");
    if (cfg.latency.rate_spread_decades < 0.0)
      throw ConfigError("config: invalid value for field 'latency.rate_spread_decades'");
  } else if (ltype == "lognormal") {
    cfg.latency.kind = LatencyModel::Kind::lognormal;
    cfg.latency.mu = opt<double>(j, "latency.mu", 0.0);
    cfg.latency.sigma = opt<double>(j, "latency.sigma", 1.0);
    if (cfg.latency.sigma <= 0.0) throw ConfigError("config: invalid value for field 'latency.sigma'");
  } else if (ltype == "deterministic") {
    cfg.latency.kind = LatencyModel::Kind::deterministic;
    cfg.latency.value = opt<double>(j, "latency.value", 1.0);
    if (cfg.latency.value <= 0.0) throw ConfigError("config: invalid value for field 'latency.value'");
  } else {
    throw ConfigError("config: invalid value for field 'latency.type'");
  }

  cfg.algorithm.variant = req<std::string>(j, "algorithm.variant");
  static const std::set<std::string> variants = {"wkafl", "twafl", "sasgd", "gsgm", "kavg", "expmom"};
  if (!variants.count(cfg.algorithm.variant))
    throw ConfigError("config: invalid value for field 'algorithm.variant'");
  cfg.algorithm.eta0 = opt<double>(j, "algorithm.eta0", 0.5);
  cfg.algorithm.alpha = opt<double>(j, "algorithm.alpha", 0.5);
  cfg.algorithm.beta = opt<double>(j, "algorithm.beta", 2.0);
  cfg.algorithm.sim_min = opt<double>(j, "algorithm.sim_min", 0.3);
  cfg.algorithm.gamma = opt<double>(j, "algorithm.gamma", 0.1);
  cfg.algorithm.clip_ratio = opt<double>(j, "algorithm.clip_ratio", 4.0);
  cfg.algorithm.clip_bound = opt<double>(j, "algorithm.clip_bound", 10.0);
  if (find_path(j, "algorithm.epsilon") != nullptr)
    cfg.algorithm.epsilon = req<double>(j, "algorithm.epsilon");
  cfg.algorithm.gsgm_momentum = opt<double>(j, "algorithm.gsgm_momentum", 0.9);
  cfg.algorithm.expmom_alpha = opt<double>(j, "algorithm.expmom_alpha", 0.5);
  cfg.algorithm.expmom_sharpness =
      opt<double>(j, "algorithm.expmom_sharpness", 0.30685281944005469);

  // Cross-field checks.
  if (cfg.iterations < 1) throw ConfigError("config: 'iterations' must be at least 1");
  if (cfg.k < 1 || cfg.k > cfg.partition.clients)
    throw ConfigError("config: 'k' must be in [1, partition.clients]");
  if (cfg.eval_every < 1) throw ConfigError("config: 'eval_every' must be at least 1");
  if (cfg.mu <= 0.0) throw ConfigError("config: 'mu' must be positive");
  if (cfg.a_num < 1) throw ConfigError("config: 'a_num' must be at least 1");
  if (cfg.batch_size < 1 || cfg.batch_size > cfg.partition.min_samples)
    throw ConfigError("config: 'batch_size' must be in [1, partition.min_samples]");
  if (cfg.algorithm.eta0 <= 0.0) throw ConfigError("config: 'algorithm.eta0' must be positive");
  return cfg;
}

SweepConfig parse_sweep_config(const json& j) {
  SweepConfig sweep;
  if (!j.contains("base") || !j["base"].is_object())
    throw ConfigError("config: missing field 'base'");
  sweep.base = j["base"];

  const json* axes = find_path(j, "axes");
  if (axes == nullptr || !axes->is_object()) throw ConfigError("config: missing field 'axes'");

  const json* pk = find_path(j, "axes.pk");
  if (pk == nullptr || !pk->is_array() || pk->empty())
    throw ConfigError("config: 'axes.pk' must be a non-empty array");
  for (const auto& cell : *pk)
    sweep.pk.emplace_back(req<int>(cell, "clients"), req<int>(cell, "k"));

  sweep.labels_per_client = req<std::vector<int>>(j, "axes.labels_per_client");
  sweep.variants = req<std::vector<std::string>>(j, "axes.variants");
  sweep.seeds = req<std::vector<std::uint64_t>>(j, "axes.seeds");
  if (sweep.labels_per_client.empty())
    throw ConfigError("config: 'axes.labels_per_client' must be non-empty");
  if (sweep.variants.empty()) throw ConfigError("config: 'axes.variants' must be non-empty");
  if (sweep.seeds.empty()) throw ConfigError("config: 'axes.seeds' must be non-empty");
  return sweep;
}

}  // namespace kasync
