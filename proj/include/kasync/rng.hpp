#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace kasync {

/// splitmix64 finalizer; used to derive independent seeds from (base, stream) pairs.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic seed for a named sub-stream of a run seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

/// Deterministic random source. The engine (mt19937_64) is specified by the
/// standard bit-for-bit; the samplers below are implemented here rather than
/// with std::*_distribution, whose output is implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [lo, hi], inclusive. Unbiased (Lemire rejection).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal (Box-Muller, cached partner value).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Exponential with given rate (mean 1/rate).
  double exponential(double rate);

  double lognormal(double mu, double sigma);

  /// k distinct indices drawn uniformly from [0, n). Partial Fisher-Yates.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace kasync
