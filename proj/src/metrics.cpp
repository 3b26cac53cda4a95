#include "kasync/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "kasync/errors.hpp"

namespace kasync {

std::vector<double> MetricsLog::accuracy_curve() const {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.test_accuracy) out.push_back(*r.test_accuracy);
  return out;
}

double instantaneous_weighted_staleness(const IterationRecord& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.weights.size(); ++i)
    s += r.weights[i] * static_cast<double>(r.gaps[i]);
  return s;
}

int instantaneous_aggregated_count(const IterationRecord& r, double mu) {
  if (r.weights_fallback || r.weights.empty()) return 0;
  const double pmax = *std::max_element(r.weights.begin(), r.weights.end());
  int n = 0;
  for (double p : r.weights)
    if (p >= pmax / mu) ++n;
  return n;
}

double avg_staleness(const MetricsLog& log) {
  if (log.records.empty()) throw UsageError("avg_staleness: empty log");
  double sum = 0.0;
  for (const auto& r : log.records) sum += instantaneous_weighted_staleness(r);
  return sum / static_cast<double>(log.records.size());
}

double avg_aggregated_count(const MetricsLog& log, double mu) {
  if (mu <= 0.0) throw UsageError("avg_aggregated_count: mu must be positive");
  if (log.records.empty()) throw UsageError("avg_aggregated_count: empty log");
  long total = 0;
  for (const auto& r : log.records) total += instantaneous_aggregated_count(r, mu);
  return static_cast<double>(total) / static_cast<double>(log.records.size());
}

std::map<int, long> predominated_histogram(const MetricsLog& log, double w_g) {
  if (w_g <= 0.0 || w_g > 1.0) throw UsageError("predominated_histogram: w_g must be in (0,1]");
  std::map<int, long> hist;
  for (const auto& r : log.records) {
    int n = 0;
    for (double p : r.weights)
      if (p > w_g) ++n;
    ++hist[n];
  }
  return hist;
}

double training_stability(const std::vector<double>& accuracies, int a_num) {
  if (a_num < 1) throw UsageError("training_stability: a_num must be at least 1");
  if (static_cast<int>(accuracies.size()) < a_num)
    throw UsageError("training_stability: need at least a_num accuracy values");
  const std::size_t start = accuracies.size() - static_cast<std::size_t>(a_num);
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(a_num));
  for (std::size_t i = start; i < accuracies.size(); ++i) {
    if (accuracies[i] <= 0.0)
      throw UsageError("training_stability: accuracy must be positive (log undefined)");
    logs.push_back(std::log(accuracies[i]));
  }
  double mean = 0.0;
  for (double v : logs) mean += v;
  mean /= static_cast<double>(logs.size());
  double var = 0.0;
  for (double v : logs) var += (v - mean) * (v - mean);
  var /= static_cast<double>(logs.size());  // population variance
  return std::sqrt(var);
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw UsageError("spearman: need two equal-size series");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace kasync
