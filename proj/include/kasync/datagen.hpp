#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kasync/dataset.hpp"

namespace kasync {

/// Label-restricted partition: each client receives exactly labels_per_client
/// distinct labels and a total sample count drawn from [min_samples, max_samples].
struct PartitionSpec {
  int clients = 1;
  int labels_per_client = 1;
  int min_samples = 1;
  int max_samples = 1;
  std::uint64_t seed = 0;
};

void validate(const PartitionSpec& spec, int class_count);

/// Splits `source` into spec.clients shards. Per client: labels sampled
/// uniformly without replacement, per-label counts proportional to uniform(0,1)
/// weights with largest-remainder rounding (total hits the drawn count
/// exactly, every selected label keeps at least one sample), samples drawn
/// with replacement from the source class pools. Deterministic given the seed.
std::vector<LabeledDataset> partition_non_iid(const LabeledDataset& source, const PartitionSpec& spec);

/// Gaussian blobs with unit covariance. Class means sit equally spaced on a
/// circle of radius separation/2 when dim == 2, otherwise on the first
/// `classes` coordinate axes scaled by `separation` (requires dim >= classes).
LabeledDataset synth_gaussian(int classes, int dim, int per_class, double separation,
                              std::uint64_t seed);

/// Reads an IDX image/label file pair (big-endian, magics 2051/2049); pixels
/// scaled to [0,1]. Throws FormatError with the failing byte offset.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace kasync
