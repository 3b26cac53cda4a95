#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <vector>

#include "kasync/dataset.hpp"
#include "kasync/metrics.hpp"
#include "kasync/model.hpp"
#include "kasync/server.hpp"

namespace kasync {

/// Per-dispatch compute+upload latency in virtual seconds.
struct LatencyModel {
  enum class Kind { shifted_exponential, lognormal, deterministic };
  Kind kind = Kind::shifted_exponential;
  double shift = 0.0;   // shifted_exponential
  double rate = 1.0;    // shifted_exponential
  double mu = 0.0;      // lognormal
  double sigma = 1.0;   // lognormal
  double value = 1.0;   // deterministic

  double sample(Rng& rng) const;
};

struct ClientProfile {
  int id = 0;
  LabeledDataset shard;
  LatencyModel latency;
  int batch_size = 1;
};

/// One client upload: gradient, batch loss, and when the parameters were fetched.
struct GradientReport {
  int client_id = 0;
  ParamVector gradient;
  double loss = 0.0;
  long fetch_iteration = 0;
  long staleness = 0;   // arrival iteration - fetch iteration, fresh = 0
  int batch_size = 1;   // samples behind the gradient (TWAFL weighting)
};

/// Virtual-time engine for the K-async protocol: every client always has one
/// job in flight; each iteration the first K completions are collected and only
/// those clients are re-dispatched, so stragglers keep computing on old
/// parameters.
class Simulator {
public:
  Simulator(std::vector<ClientProfile> clients, ModelSpec model, std::uint64_t seed);

  /// Dispatches every client with the initial parameters (fetch iteration 0).
  void init(const ParamVector& params);

  /// Pops the K earliest completions in (time, client id) order, advances the
  /// clock to the K-th completion, and computes each report's gradient on a
  /// fresh mini-batch from the client's shard. Reporters are left un-dispatched.
  std::vector<GradientReport> collect_k(int k);

  /// Starts a new job for each listed client: fetch_iteration = iteration,
  /// freshly sampled latency. Throws InternalError on double-dispatch.
  void dispatch(const std::vector<int>& client_ids, const ParamVector& params, long iteration);

  void advance_iteration() { ++iteration_; }

  long iteration() const { return iteration_; }
  double clock() const { return clock_; }
  std::size_t client_count() const { return clients_.size(); }
  const ModelSpec& model() const { return model_; }

  /// Mean of (gap + 1) over every in-flight job, measured against the current
  /// iteration. With all clients in flight this is the per-iteration averaged
  /// staleness in 1-based counting.
  double mean_gap_plus_one() const;

private:
  struct Job {
    bool active = false;
    long fetch_iteration = 0;
    double completion = 0.0;
    std::shared_ptr<const ParamVector> params;
  };

  std::vector<ClientProfile> clients_;
  ModelSpec model_;
  std::vector<Job> jobs_;
  std::set<std::pair<double, int>> queue_;  // (completion time, client id)
  std::vector<Rng> latency_rng_;
  std::vector<Rng> batch_rng_;
  double clock_ = 0.0;
  long iteration_ = 0;
  bool initialized_ = false;
};

/// Run-loop knobs for `run`.
struct RunOptions {
  long iterations = 1;
  int k = 1;
  long eval_every = 25;         // test accuracy cadence; final iteration always evaluated
  double mu = 10.0;             // threshold ratio for the aggregated-gradient count
  const LabeledDataset* test_set = nullptr;  // optional
};

/// Executes `iterations` rounds of collect -> server step -> dispatch and
/// returns the per-iteration log. Deterministic given the simulator seed.
MetricsLog run(Simulator& sim, ServerAlgorithm& server, const RunOptions& opts);

}  // namespace kasync
