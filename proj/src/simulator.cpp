#include "kasync/simulator.hpp"

#include <algorithm>

#include "kasync/errors.hpp"

namespace kasync {

double LatencyModel::sample(Rng& rng) const {
  switch (kind) {
    case Kind::shifted_exponential:
      return shift + rng.exponential(rate);
    case Kind::lognormal:
      return rng.lognormal(mu, sigma);
    case Kind::deterministic:
      return value;
  }
  throw InternalError("latency model: unknown kind");
}

Simulator::Simulator(std::vector<ClientProfile> clients, ModelSpec model, std::uint64_t seed)
    : clients_(std::move(clients)), model_(model) {
  if (clients_.empty()) throw UsageError("simulator: need at least one client");
  validate_spec(model_);
  jobs_.resize(clients_.size());
  latency_rng_.reserve(clients_.size());
  batch_rng_.reserve(clients_.size());
  for (std::size_t c = 0; c < clients_.size(); ++c) {
    if (clients_[c].shard.size() == 0)
      throw ConfigError("simulator: client " + std::to_string(c) + " has an empty shard");
    if (clients_[c].batch_size < 1 ||
        static_cast<std::size_t>(clients_[c].batch_size) > clients_[c].shard.size())
      throw ConfigError("simulator: client " + std::to_string(c) +
                        " batch_size must be in [1, shard size]");
    latency_rng_.emplace_back(derive_seed(seed, 0x6c6174ULL /* "lat" */, c));
    batch_rng_.emplace_back(derive_seed(seed, 0x626174ULL /* "bat" */, c));
  }
}

void Simulator::init(const ParamVector& params) {
  if (initialized_) throw UsageError("simulator: init called twice");
  initialized_ = true;
  clock_ = 0.0;
  iteration_ = 0;
  auto snapshot = std::make_shared<const ParamVector>(params);
  for (std::size_t c = 0; c < clients_.size(); ++c) {
    Job& job = jobs_[c];
    job.active = true;
    job.fetch_iteration = 0;
    job.completion = clients_[c].latency.sample(latency_rng_[c]);
    job.params = snapshot;
    queue_.emplace(job.completion, static_cast<int>(c));
  }
}

std::vector<GradientReport> Simulator::collect_k(int k) {
  if (!initialized_) throw UsageError("simulator: collect before init");
  if (k < 1 || static_cast<std::size_t>(k) > clients_.size())
    throw UsageError("simulator: K must be in [1, client count]");
  if (queue_.size() < static_cast<std::size_t>(k))
    throw InternalError("simulator: fewer in-flight jobs than K");

  std::vector<GradientReport> reports;
  reports.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const auto [time, client_id] = *queue_.begin();
    queue_.erase(queue_.begin());
    if (time < clock_) throw InternalError("simulator: event earlier than clock");
    clock_ = time;

    const auto c = static_cast<std::size_t>(client_id);
    Job& job = jobs_[c];
    job.active = false;

    const auto batch = sample_minibatch(clients_[c].shard,
                                        static_cast<std::size_t>(clients_[c].batch_size),
                                        batch_rng_[c]);
    auto lg = loss_and_gradient(model_, *job.params, batch);

    GradientReport rep;
    rep.client_id = client_id;
    rep.gradient = std::move(lg.grad);
    rep.loss = lg.loss;
    rep.fetch_iteration = job.fetch_iteration;
    rep.staleness = iteration_ - job.fetch_iteration;
    rep.batch_size = clients_[c].batch_size;
    job.params.reset();
    reports.push_back(std::move(rep));
  }
  return reports;
}

void Simulator::dispatch(const std::vector<int>& client_ids, const ParamVector& params,
                         long iteration) {
  auto snapshot = std::make_shared<const ParamVector>(params);
  for (int id : client_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= clients_.size())
      throw UsageError("simulator: dispatch to unknown client " + std::to_string(id));
    const auto c = static_cast<std::size_t>(id);
    Job& job = jobs_[c];
    if (job.active) throw InternalError("simulator: double dispatch to client " + std::to_string(id));
    job.active = true;
    job.fetch_iteration = iteration;
    job.completion = clock_ + clients_[c].latency.sample(latency_rng_[c]);
    job.params = snapshot;
    queue_.emplace(job.completion, id);
  }
}

double Simulator::mean_gap_plus_one() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& job : jobs_) {
    if (!job.active) continue;
    sum += static_cast<double>(iteration_ - job.fetch_iteration + 1);
    ++n;
  }
  if (n == 0) return 0.0;
  return sum / static_cast<double>(n);
}

MetricsLog run(Simulator& sim, ServerAlgorithm& server, const RunOptions& opts) {
  if (opts.iterations < 0) throw UsageError("run: iterations must be non-negative");
  if (opts.eval_every < 1) throw UsageError("run: eval_every must be at least 1");

  MetricsLog log;
  if (opts.iterations == 0) return log;
  sim.init(server.params());

  for (long j = 0; j < opts.iterations; ++j) {
    IterationRecord rec;
    rec.iteration = j;
    rec.mean_gap_plus_one = sim.mean_gap_plus_one();

    auto reports = sim.collect_k(opts.k);
    rec.vtime = sim.clock();
    rec.gaps.reserve(reports.size());
    rec.client_ids.reserve(reports.size());
    for (const auto& r : reports) {
      rec.gaps.push_back(r.staleness);
      rec.client_ids.push_back(r.client_id);
      rec.sum_loss += r.loss;
    }

    auto res = server.step(reports);
    rec.eta = res.eta;
    rec.stage = res.stage;
    rec.weights = std::move(res.weights);
    rec.weights_fallback = res.weights_fallback;

    std::vector<int> reporter_ids;
    reporter_ids.reserve(reports.size());
    for (const auto& r : reports) reporter_ids.push_back(r.client_id);
    sim.dispatch(reporter_ids, server.params(), j + 1);
    sim.advance_iteration();

    if (opts.test_set != nullptr &&
        ((j + 1) % opts.eval_every == 0 || j + 1 == opts.iterations))
      rec.test_accuracy = evaluate_accuracy(sim.model(), server.params(), *opts.test_set);

    log.records.push_back(std::move(rec));
  }
  return log;
}

}  // namespace kasync
