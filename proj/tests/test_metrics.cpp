#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kasync/errors.hpp"
#include "kasync/metrics.hpp"
#include "kasync/rng.hpp"

using namespace kasync;

namespace {

IterationRecord rec(std::vector<double> weights, std::vector<long> gaps) {
  IterationRecord r;
  r.weights = std::move(weights);
  r.gaps = std::move(gaps);
  r.client_ids.assign(r.weights.size(), 0);
  return r;
}

MetricsLog log_of(std::vector<IterationRecord> records) {
  MetricsLog log;
  log.records = std::move(records);
  return log;
}

}  // namespace

TEST_CASE("average weighted staleness") {
  CHECK(avg_staleness(log_of({rec({0.5, 0.5}, {0, 0})})) == 0.0);
  CHECK(avg_staleness(log_of({rec({0.5, 0.5}, {2, 4})})) == doctest::Approx(3.0));
  // uniform weights, constant gap c
  CHECK(avg_staleness(log_of({rec({0.25, 0.25, 0.25, 0.25}, {7, 7, 7, 7})})) ==
        doctest::Approx(7.0));

  SUBCASE("permutation within an iteration does not matter") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> w;
      std::vector<long> g;
      double sum = 0.0;
      for (int i = 0; i < 6; ++i) {
        w.push_back(rng.uniform());
        g.push_back(rng.uniform_int(0, 20));
        sum += w.back();
      }
      for (auto& x : w) x /= sum;
      auto w2 = w;
      auto g2 = g;
      // same permutation applied to both columns
      for (std::size_t i = 0; i < w.size(); ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, 5));
        std::swap(w2[i], w2[j]);
        std::swap(g2[i], g2[j]);
      }
      REQUIRE(avg_staleness(log_of({rec(w, g)})) ==
              doctest::Approx(avg_staleness(log_of({rec(w2, g2)}))).epsilon(1e-12));
    }
  }
}

TEST_CASE("average aggregated-gradient count") {
  const auto uniform = log_of({rec({0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05,
                                    0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05},
                                   std::vector<long>(20, 0))});
  CHECK(avg_aggregated_count(uniform, 1.0) == 20.0);
  CHECK(avg_aggregated_count(uniform, 10.0) == 20.0);

  const auto skewed = log_of({rec({0.9, 0.05, 0.05}, {0, 0, 0})});
  CHECK(avg_aggregated_count(skewed, 10.0) == 1.0);  // threshold 0.09
  CHECK(avg_aggregated_count(skewed, 1.0) == 1.0);   // only the max itself

  SUBCASE("monotone in mu and within [1, K] on a simplex") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> w;
      double sum = 0.0;
      const int k = static_cast<int>(rng.uniform_int(1, 10));
      for (int i = 0; i < k; ++i) {
        w.push_back(rng.uniform() + 1e-6);
        sum += w.back();
      }
      for (auto& x : w) x /= sum;
      const auto log = log_of({rec(w, std::vector<long>(w.size(), 0))});
      double prev = 0.0;
      for (double mu : {1.0, 2.0, 5.0, 20.0, 1e6}) {
        const double n = avg_aggregated_count(log, mu);
        REQUIRE(n >= 1.0);
        REQUIRE(n <= static_cast<double>(k));
        REQUIRE(n >= prev);
        prev = n;
      }
    }
  }
}

TEST_CASE("predominated-gradient histogram") {
  // uniform 1/20 weights with w_g = 0.1: no weight clears the threshold
  std::vector<double> w(20, 0.05);
  const auto log = log_of({rec(w, std::vector<long>(20, 0)), rec(w, std::vector<long>(20, 0))});
  const auto hist = predominated_histogram(log, 0.1);
  REQUIRE(hist.size() == 1);
  CHECK(hist.at(0) == 2);

  const auto single = log_of({rec({1.0}, {0}), rec({1.0}, {0}), rec({1.0}, {0})});
  const auto hist2 = predominated_histogram(single, 0.1);
  CHECK(hist2.at(1) == 3);

  CHECK_THROWS_AS(predominated_histogram(log, 0.0), UsageError);
  CHECK_THROWS_AS(predominated_histogram(log, 1.5), UsageError);
}

TEST_CASE("training stability") {
  CHECK(training_stability(std::vector<double>(10, 0.9), 10) < 1e-12);  // constant curve

  SUBCASE("one multiplicative-e outlier in ten gives exactly 0.3") {
    std::vector<double> acc(9, 0.9);
    acc.push_back(0.9 * std::numbers::e);
    // logs are {ln 0.9 x9, ln 0.9 + 1}: population std = sqrt(9*0.01 + 0.81)/sqrt(10)... = 0.3
    CHECK(training_stability(acc, 10) == doctest::Approx(0.3).epsilon(1e-12));
  }

  CHECK(training_stability({0.5}, 1) == 0.0);
  CHECK(training_stability({0.1, 0.2, 0.9}, 2) ==
        doctest::Approx(training_stability({0.2, 0.9}, 2)).epsilon(1e-12));  // window = last a_num

  SUBCASE("scaling every accuracy leaves the metric unchanged") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> acc, scaled_acc;
      const double c = rng.uniform(0.1, 3.0);
      for (int i = 0; i < 12; ++i) {
        acc.push_back(rng.uniform(0.05, 1.0));
        scaled_acc.push_back(c * acc.back());
      }
      REQUIRE(training_stability(acc, 10) ==
              doctest::Approx(training_stability(scaled_acc, 10)).epsilon(1e-10));
    }
  }

  CHECK_THROWS_AS(training_stability({0.5, 0.6}, 5), UsageError);
  CHECK_THROWS_AS(training_stability({0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 10),
                  UsageError);
}

TEST_CASE("spearman rank correlation") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
  // monotone but nonlinear still ranks perfectly
  CHECK(spearman({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(spearman({1.0}, {1.0}), UsageError);
}

TEST_CASE("accuracy curve extraction") {
  MetricsLog log;
  IterationRecord a = rec({1.0}, {0});
  IterationRecord b = rec({1.0}, {0});
  b.test_accuracy = 0.75;
  IterationRecord c = rec({1.0}, {0});
  c.test_accuracy = 0.85;
  log.records = {a, b, c};
  CHECK(log.accuracy_curve() == std::vector<double>{0.75, 0.85});
}
