#pragma once

#include <cstddef>
#include <vector>

#include "kasync/rng.hpp"

namespace kasync {

/// Labeled samples, features stored row-major (size() x dim).
struct LabeledDataset {
  std::vector<double> features;
  std::vector<int> labels;
  int dim = 0;
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
  const double* row(std::size_t i) const { return features.data() + i * static_cast<std::size_t>(dim); }
};

/// One gradient-step batch: n x dim features plus n labels.
struct MiniBatch {
  std::vector<double> features;
  std::vector<int> labels;
  int dim = 0;

  std::size_t size() const { return labels.size(); }
  const double* row(std::size_t i) const { return features.data() + i * static_cast<std::size_t>(dim); }
};

/// m samples drawn uniformly without replacement within the batch.
MiniBatch sample_minibatch(const LabeledDataset& data, std::size_t m, Rng& rng);

}  // namespace kasync
