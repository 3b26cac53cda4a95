#include "kasync/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "kasync/baselines.hpp"
#include "kasync/errors.hpp"
#include "kasync/io.hpp"
#include "kasync/svg.hpp"
#include "kasync/wkafl.hpp"

namespace kasync {

using nlohmann::json;

namespace {

struct BuiltWorld {
  LabeledDataset train;
  std::optional<LabeledDataset> test;
  ModelSpec model;
  std::vector<ClientProfile> clients;
};

BuiltWorld build_world(const ExperimentConfig& cfg) {
  BuiltWorld w;
  if (cfg.dataset.type == DatasetConfig::Type::synth) {
    w.train = synth_gaussian(cfg.dataset.classes, cfg.dataset.dim, cfg.dataset.per_class,
                             cfg.dataset.separation, derive_seed(cfg.seed, 0x7472ULL /* "tr" */));
    if (cfg.dataset.test_per_class > 0)
      w.test = synth_gaussian(cfg.dataset.classes, cfg.dataset.dim, cfg.dataset.test_per_class,
                              cfg.dataset.separation, derive_seed(cfg.seed, 0x7465ULL /* "te" */));
  } else {
    w.train = load_idx(cfg.dataset.train_images, cfg.dataset.train_labels);
    if (!cfg.dataset.test_images.empty())
      w.test = load_idx(cfg.dataset.test_images, cfg.dataset.test_labels);
  }

  w.model.kind = cfg.model_kind;
  w.model.input_dim = w.train.dim;
  w.model.num_classes = w.train.class_count;
  w.model.hidden_dim = cfg.hidden_dim;
  validate_spec(w.model);

  PartitionSpec part = cfg.partition;
  part.seed = derive_seed(cfg.seed, 0x73686172ULL /* "shar" */);
  auto shards = partition_non_iid(w.train, part);

  Rng rate_rng(derive_seed(cfg.seed, 0x72617465ULL /* "rate" */));
  w.clients.reserve(shards.size());
  for (std::size_t c = 0; c < shards.size(); ++c) {
    ClientProfile p;
    p.id = static_cast<int>(c);
    p.shard = std::move(shards[c]);
    p.batch_size = cfg.batch_size;
    LatencyModel lat;
    lat.kind = cfg.latency.kind;
    switch (cfg.latency.kind) {
      case LatencyModel::Kind::shifted_exponential:
        lat.shift = cfg.latency.shift;
        // Heterogeneous client speeds: rate log-uniform over the configured decades.
        lat.rate = cfg.latency.rate *
                   std::pow(10.0, rate_rng.uniform() * cfg.latency.rate_spread_decades);
        break;
      case LatencyModel::Kind::lognormal:
        lat.mu = cfg.latency.mu;
        lat.sigma = cfg.latency.sigma;
        break;
      case LatencyModel::Kind::deterministic:
        lat.value = cfg.latency.value;
        break;
    }
    p.latency = lat;
    w.clients.push_back(std::move(p));
  }
  return w;
}

}  // namespace

ParamVector initial_params(const ModelSpec& spec, std::uint64_t seed) {
  ParamVector w(param_count(spec), 0.0);
  if (spec.kind == ModelKind::mlp) {
    Rng rng(derive_seed(seed, 0x696e6974ULL /* "init" */));
    const auto d = static_cast<std::size_t>(spec.input_dim);
    const auto h = static_cast<std::size_t>(spec.hidden_dim);
    const auto c = static_cast<std::size_t>(spec.num_classes);
    const double r1 = std::sqrt(6.0 / static_cast<double>(d + h));
    const double r2 = std::sqrt(6.0 / static_cast<double>(h + c));
    for (std::size_t i = 0; i < h * d; ++i) w[i] = rng.uniform(-r1, r1);
    for (std::size_t i = 0; i < c * h; ++i) w[h * d + h + i] = rng.uniform(-r2, r2);
  }
  return w;
}

std::unique_ptr<ServerAlgorithm> make_server(const AlgorithmConfig& alg, int k, int total_clients,
                                             ParamVector initial) {
  if (alg.variant == "wkafl") {
    WkaflParams p;
    p.eta0 = alg.eta0;
    p.alpha = alg.alpha;
    p.beta = alg.beta;
    p.sim_min = alg.sim_min;
    p.gamma = alg.gamma;
    p.clip_ratio = alg.clip_ratio;
    p.clip_bound = alg.clip_bound;
    p.epsilon = alg.epsilon.value_or(0.3 * static_cast<double>(k));
    p.k = k;
    validate(p);
    return std::make_unique<WkaflServer>(p, std::move(initial));
  }
  if (alg.variant == "twafl") return std::make_unique<TwaflServer>(alg.eta0, std::move(initial));
  if (alg.variant == "sasgd") return std::make_unique<SasgdServer>(alg.eta0, std::move(initial));
  if (alg.variant == "gsgm")
    return std::make_unique<GsgmServer>(alg.eta0, alg.gsgm_momentum, total_clients, std::move(initial));
  if (alg.variant == "kavg") return std::make_unique<KavgServer>(alg.eta0, std::move(initial));
  if (alg.variant == "expmom")
    return std::make_unique<ExpMomServer>(alg.eta0, alg.expmom_alpha, alg.expmom_sharpness,
                                          std::move(initial));
  throw ConfigError("config: invalid value for field 'algorithm.variant'");
}

RunArtifacts execute_run(const ExperimentConfig& cfg) {
  auto world = build_world(cfg);
  auto server = make_server(cfg.algorithm, cfg.k, cfg.partition.clients,
                            initial_params(world.model, cfg.seed));

  Simulator sim(std::move(world.clients), world.model, derive_seed(cfg.seed, 0x73696dULL /* "sim" */));

  RunOptions opts;
  opts.iterations = cfg.iterations;
  opts.k = cfg.k;
  opts.eval_every = cfg.eval_every;
  opts.mu = cfg.mu;
  opts.test_set = world.test ? &*world.test : nullptr;

  RunArtifacts art;
  art.model = world.model;
  art.log = run(sim, *server, opts);
  art.log.seed = cfg.seed;

  art.tau_ave = avg_staleness(art.log);
  art.n_ave = avg_aggregated_count(art.log, cfg.mu);
  const auto curve = art.log.accuracy_curve();
  if (!curve.empty()) art.final_accuracy = curve.back();
  if (static_cast<int>(curve.size()) >= cfg.a_num)
    art.stability = training_stability(curve, cfg.a_num);
  return art;
}

namespace {

std::string metrics_csv(const MetricsLog& log, double mu) {
  std::ostringstream out;
  out << "iter,vtime,stage,eta,sum_loss,tau_min,tau_ave_inst,n_agg_inst,test_acc\n";
  for (const auto& r : log.records) {
    long tau_min = 0;
    if (!r.gaps.empty()) tau_min = *std::min_element(r.gaps.begin(), r.gaps.end());
    out << r.iteration << ',' << fmt_double(r.vtime) << ',' << r.stage << ',' << fmt_double(r.eta)
        << ',' << fmt_double(r.sum_loss) << ',' << tau_min << ','
        << fmt_double(instantaneous_weighted_staleness(r)) << ','
        << instantaneous_aggregated_count(r, mu) << ',';
    if (r.test_accuracy) out << fmt_double(*r.test_accuracy);
    out << '\n';
  }
  return out.str();
}

std::string weights_csv(const MetricsLog& log) {
  std::ostringstream out;
  out << "iter,slot,client,gap,weight,fallback\n";
  for (const auto& r : log.records)
    for (std::size_t i = 0; i < r.weights.size(); ++i)
      out << r.iteration << ',' << i << ',' << r.client_ids[i] << ',' << r.gaps[i] << ','
          << fmt_double(r.weights[i]) << ',' << (r.weights_fallback ? 1 : 0) << '\n';
  return out.str();
}

json summary_json(const ExperimentConfig& cfg, const RunArtifacts& art, const json& echo) {
  json s;
  s["final_accuracy"] = art.final_accuracy ? json(*art.final_accuracy) : json(nullptr);
  s["tau_ave"] = art.tau_ave;
  s["n_ave"] = art.n_ave;
  s["stability"] = art.stability ? json(*art.stability) : json(nullptr);
  s["seed"] = cfg.seed;
  s["iterations"] = cfg.iterations;
  s["k"] = cfg.k;
  s["variant"] = cfg.algorithm.variant;
  s["config"] = echo;
  return s;
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, const json& config_echo,
                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  log_info("run: variant=" + cfg.algorithm.variant + " out=" + out_dir.string());
  const auto art = execute_run(cfg);
  atomic_write_file(out_dir / "config.json", config_echo.dump(2) + "\n");
  atomic_write_file(out_dir / "metrics.csv", metrics_csv(art.log, cfg.mu));
  atomic_write_file(out_dir / "weights.csv", weights_csv(art.log));
  atomic_write_file(out_dir / "summary.json", summary_json(cfg, art, config_echo).dump(2) + "\n");
}

namespace {

struct SweepCell {
  int clients, k, labels;
  std::string variant;
  std::uint64_t seed;
  std::string name;
  json config;
};

std::vector<SweepCell> enumerate_cells(const SweepConfig& sweep) {
  std::vector<SweepCell> cells;
  for (const auto& [clients, k] : sweep.pk)
    for (int labels : sweep.labels_per_client)
      for (const auto& variant : sweep.variants)
        for (auto seed : sweep.seeds) {
          SweepCell cell;
          cell.clients = clients;
          cell.k = k;
          cell.labels = labels;
          cell.variant = variant;
          cell.seed = seed;
          cell.name = "p" + std::to_string(clients) + "_k" + std::to_string(k) + "_l" +
                      std::to_string(labels) + "_" + variant + "_seed" + std::to_string(seed);
          cell.config = sweep.base;
          cell.config["partition"]["clients"] = clients;
          cell.config["k"] = k;
          cell.config["partition"]["labels_per_client"] = labels;
          cell.config["algorithm"]["variant"] = variant;
          cell.config["seed"] = seed;
          cells.push_back(std::move(cell));
        }
  return cells;
}

std::string opt_field(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }

}  // namespace

void run_sweep(const SweepConfig& sweep, const std::filesystem::path& out_dir, int parallel) {
  if (parallel < 1) throw UsageError("sweep: parallel must be at least 1");
  auto cells = enumerate_cells(sweep);
  std::filesystem::create_directories(out_dir);

  // Validate every cell before starting any work.
  std::vector<ExperimentConfig> configs;
  configs.reserve(cells.size());
  for (const auto& cell : cells) configs.push_back(parse_experiment_config(cell.config));

  std::vector<std::optional<RunArtifacts>> results(cells.size());
  std::vector<std::string> failures(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const auto art = execute_run(configs[i]);
        const auto dir = out_dir / cells[i].name;
        std::filesystem::create_directories(dir);
        atomic_write_file(dir / "config.json", cells[i].config.dump(2) + "\n");
        atomic_write_file(dir / "metrics.csv", metrics_csv(art.log, configs[i].mu));
        atomic_write_file(dir / "weights.csv", weights_csv(art.log));
        atomic_write_file(dir / "summary.json",
                          summary_json(configs[i], art, cells[i].config).dump(2) + "\n");
        results[i] = art;
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };

  if (parallel == 1 || cells.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(parallel), cells.size());
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!failures[i].empty())
      throw NumericError("sweep: cell " + cells[i].name + " failed: " + failures[i]);

  std::ostringstream out;
  out << "cell,clients,k,labels_per_client,variant,seed,final_accuracy,tau_ave,n_ave,stability\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& art = *results[i];
    std::optional<double> final_acc = art.final_accuracy;
    out << c.name << ',' << c.clients << ',' << c.k << ',' << c.labels << ',' << c.variant << ','
        << c.seed << ',' << opt_field(final_acc) << ',' << fmt_double(art.tau_ave) << ','
        << fmt_double(art.n_ave) << ',' << opt_field(art.stability) << '\n';
  }
  atomic_write_file(out_dir / "sweep_summary.csv", out.str());
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("plot: cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw FormatError("plot: empty csv " + path.string());
  return rows;
}

void plot_run_dir(const std::filesystem::path& dir) {
  const auto metrics = read_csv(dir / "metrics.csv");
  // accuracy curve
  PlotSeries acc{"test accuracy", {}};
  std::ostringstream acc_csv;
  acc_csv << "iter,test_acc\n";
  for (std::size_t i = 1; i < metrics.size(); ++i) {
    const auto& row = metrics[i];
    if (row.size() < 9 || row[8].empty()) continue;
    acc.points.emplace_back(std::stod(row[0]), std::stod(row[8]));
    acc_csv << row[0] << ',' << row[8] << '\n';
  }
  if (!acc.points.empty()) {
    write_line_chart_svg(dir / "accuracy_curve.svg", "Test accuracy", "iteration", "accuracy",
                         {acc});
    atomic_write_file(dir / "accuracy_curve.csv", acc_csv.str());
  }

  const auto weights = read_csv(dir / "weights.csv");
  std::map<long, double> gap_hist;
  std::map<long, long> pred_per_iter;
  for (std::size_t i = 1; i < weights.size(); ++i) {
    const auto& row = weights[i];
    gap_hist[std::stol(row[3])] += 1.0;
    const long iter = std::stol(row[0]);
    pred_per_iter.try_emplace(iter, 0);
    if (std::stod(row[4]) > 0.1) ++pred_per_iter[iter];
  }
  std::ostringstream gap_csv;
  gap_csv << "gap,count\n";
  for (const auto& [g, n] : gap_hist) gap_csv << g << ',' << static_cast<long>(n) << '\n';
  write_bar_chart_svg(dir / "staleness_hist.svg", "Staleness of aggregated gradients", "gap",
                      "gradients", gap_hist);
  atomic_write_file(dir / "staleness_hist.csv", gap_csv.str());

  std::map<long, double> pred_hist;
  for (const auto& [iter, n] : pred_per_iter) pred_hist[n] += 1.0;
  std::ostringstream pred_csv;
  pred_csv << "predominated_count,iterations\n";
  for (const auto& [n, cnt] : pred_hist) pred_csv << n << ',' << static_cast<long>(cnt) << '\n';
  write_bar_chart_svg(dir / "predominated_hist.svg", "Predominated gradients per iteration",
                      "gradients with weight > 0.1", "iterations", pred_hist);
  atomic_write_file(dir / "predominated_hist.csv", pred_csv.str());
}

void plot_sweep_dir(const std::filesystem::path& dir) {
  const auto summary = read_csv(dir / "sweep_summary.csv");
  // group: (clients, k, labels) -> variant -> [cell names]
  std::map<std::tuple<int, int, int>, std::map<std::string, std::vector<std::string>>> groups;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const auto& row = summary[i];
    groups[{std::stoi(row[1]), std::stoi(row[2]), std::stoi(row[3])}][row[4]].push_back(row[0]);
  }
  for (const auto& [key, variants] : groups) {
    const auto [clients, k, labels] = key;
    std::vector<PlotSeries> series;
    std::ostringstream side;
    side << "variant,iter,mean_test_acc\n";
    for (const auto& [variant, cell_names] : variants) {
      // pointwise mean of the accuracy curves over seeds
      std::map<long, std::pair<double, long>> acc;
      for (const auto& name : cell_names) {
        const auto metrics = read_csv(dir / name / "metrics.csv");
        for (std::size_t i = 1; i < metrics.size(); ++i) {
          const auto& row = metrics[i];
          if (row.size() < 9 || row[8].empty()) continue;
          auto& slot = acc[std::stol(row[0])];
          slot.first += std::stod(row[8]);
          slot.second += 1;
        }
      }
      PlotSeries s{variant, {}};
      for (const auto& [iter, sum_n] : acc) {
        const double mean = sum_n.first / static_cast<double>(sum_n.second);
        s.points.emplace_back(static_cast<double>(iter), mean);
        side << variant << ',' << iter << ',' << fmt_double(mean) << '\n';
      }
      if (!s.points.empty()) series.push_back(std::move(s));
    }
    if (series.empty()) continue;
    const std::string stem = "accuracy_p" + std::to_string(clients) + "_k" + std::to_string(k) +
                             "_l" + std::to_string(labels);
    write_line_chart_svg(dir / (stem + ".svg"),
                         "Test accuracy (P=" + std::to_string(clients) + ", K=" + std::to_string(k) +
                             ", labels=" + std::to_string(labels) + ")",
                         "iteration", "accuracy", series);
    atomic_write_file(dir / (stem + ".csv"), side.str());
  }
}

}  // namespace

void emit_plots(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir / "metrics.csv")) {
    plot_run_dir(dir);
    return;
  }
  if (std::filesystem::exists(dir / "sweep_summary.csv")) {
    plot_sweep_dir(dir);
    return;
  }
  throw UsageError("plot: " + dir.string() + " contains neither metrics.csv nor sweep_summary.csv");
}

void dump_partition(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  LabeledDataset train;
  if (cfg.dataset.type == DatasetConfig::Type::synth) {
    train = synth_gaussian(cfg.dataset.classes, cfg.dataset.dim, cfg.dataset.per_class,
                           cfg.dataset.separation, derive_seed(cfg.seed, 0x7472ULL));
  } else {
    train = load_idx(cfg.dataset.train_images, cfg.dataset.train_labels);
  }
  PartitionSpec part = cfg.partition;
  part.seed = derive_seed(cfg.seed, 0x73686172ULL);
  const auto shards = partition_non_iid(train, part);

  std::filesystem::create_directories(out_dir);
  std::ostringstream out;
  out << "client,label,count\n";
  json sizes = json::array();
  for (std::size_t c = 0; c < shards.size(); ++c) {
    std::map<int, long> counts;
    for (int label : shards[c].labels) ++counts[label];
    for (const auto& [label, n] : counts) out << c << ',' << label << ',' << n << '\n';
    sizes.push_back(shards[c].size());
  }
  atomic_write_file(out_dir / "partition.csv", out.str());
  json s;
  s["clients"] = cfg.partition.clients;
  s["labels_per_client"] = cfg.partition.labels_per_client;
  s["shard_sizes"] = sizes;
  atomic_write_file(out_dir / "partition_summary.json", s.dump(2) + "\n");
}

}  // namespace kasync
