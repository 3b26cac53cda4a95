#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kasync {

/// One server iteration as seen by the measurement layer.
struct IterationRecord {
  long iteration = 0;
  double vtime = 0.0;
  double eta = 0.0;
  int stage = 1;
  std::vector<double> weights;   // aggregation weights p_i, one per report
  std::vector<long> gaps;        // staleness gap per report (fresh = 0)
  std::vector<int> client_ids;   // reporting clients, in pop order
  double sum_loss = 0.0;         // sum of the K reported batch losses
  double mean_gap_plus_one = 0.0;  // over all clients, sampled before collection
  bool weights_fallback = false;   // weights row is not a simplex this iteration
  std::optional<double> test_accuracy;
};

struct MetricsLog {
  std::vector<IterationRecord> records;
  std::uint64_t seed = 0;
  std::string config_echo;  // JSON text of the config that produced the run

  /// Test-accuracy values at evaluation points, in iteration order.
  std::vector<double> accuracy_curve() const;
};

/// sum(p_i * tau_i) for one iteration.
double instantaneous_weighted_staleness(const IterationRecord& r);

/// |{i : p_i >= max(p)/mu}| for one iteration; 0 for fallback rows.
int instantaneous_aggregated_count(const IterationRecord& r, double mu);

/// Mean over iterations of the weighted staleness sum(p_i * tau_i).
double avg_staleness(const MetricsLog& log);

/// Mean over iterations of |{i : p_i >= max_i(p_i) / mu}|; fallback rows count 0.
double avg_aggregated_count(const MetricsLog& log, double mu);

/// Frequency table over per-iteration counts of weights strictly above w_g.
std::map<int, long> predominated_histogram(const MetricsLog& log, double w_g);

/// Population standard deviation of ln(accuracy) over the last a_num values.
/// Throws UsageError on too few values or a non-positive accuracy.
double training_stability(const std::vector<double>& accuracies, int a_num);

/// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace kasync
