#include "kasync/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "kasync/errors.hpp"

namespace kasync {

MiniBatch sample_minibatch(const LabeledDataset& data, std::size_t m, Rng& rng) {
  if (m == 0 || m > data.size())
    throw UsageError("sample_minibatch: batch size must be in [1, dataset size]");
  const auto idx = rng.sample_without_replacement(data.size(), m);
  MiniBatch batch;
  batch.dim = data.dim;
  batch.features.reserve(m * static_cast<std::size_t>(data.dim));
  batch.labels.reserve(m);
  for (auto i : idx) {
    const double* r = data.row(i);
    batch.features.insert(batch.features.end(), r, r + data.dim);
    batch.labels.push_back(data.labels[i]);
  }
  return batch;
}

void validate(const PartitionSpec& spec, int class_count) {
  if (spec.clients < 1) throw ConfigError("partition: clients must be at least 1");
  if (spec.labels_per_client < 1 || spec.labels_per_client > class_count)
    throw UsageError("partition: labels_per_client must be in [1, class_count]");
  if (spec.min_samples < 1 || spec.min_samples > spec.max_samples)
    throw ConfigError("partition: need 1 <= min_samples <= max_samples");
  if (spec.min_samples < spec.labels_per_client)
    throw ConfigError("partition: min_samples must be >= labels_per_client");
}

namespace {

// Integer counts summing exactly to total, proportional to weights.
std::vector<long> largest_remainder(const std::vector<double>& weights, long total) {
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  const std::size_t n = weights.size();
  std::vector<long> counts(n);
  std::vector<std::pair<double, std::size_t>> remainders(n);
  long assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = static_cast<double>(total) * weights[i] / wsum;
    counts[i] = static_cast<long>(std::floor(exact));
    assigned += counts[i];
    remainders[i] = {exact - std::floor(exact), i};
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;  // deterministic tie-break
  });
  for (long r = total - assigned, i = 0; r > 0; --r, ++i) ++counts[remainders[static_cast<std::size_t>(i)].second];
  return counts;
}

}  // namespace

std::vector<LabeledDataset> partition_non_iid(const LabeledDataset& source, const PartitionSpec& spec) {
  validate(spec, source.class_count);

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(source.class_count));
  for (std::size_t i = 0; i < source.size(); ++i)
    by_class[static_cast<std::size_t>(source.labels[i])].push_back(i);

  std::vector<LabeledDataset> shards;
  shards.reserve(static_cast<std::size_t>(spec.clients));

  for (int client = 0; client < spec.clients; ++client) {
    Rng rng(derive_seed(spec.seed, 0x70617274ULL /* "part" */, static_cast<std::uint64_t>(client)));
    const auto lnum = static_cast<std::size_t>(spec.labels_per_client);

    auto picked = rng.sample_without_replacement(static_cast<std::size_t>(source.class_count), lnum);
    for (auto cls : picked)
      if (by_class[cls].empty())
        throw UsageError("partition: source has no samples for class " + std::to_string(cls));

    const long total = rng.uniform_int(spec.min_samples, spec.max_samples);
    std::vector<double> weights(lnum);
    for (auto& w : weights) w = rng.uniform();
    auto counts = largest_remainder(weights, total);

    // Every selected label keeps at least one sample; borrow from the largest.
    for (std::size_t i = 0; i < lnum; ++i) {
      if (counts[i] > 0) continue;
      const auto donor = static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      --counts[donor];
      ++counts[i];
    }

    LabeledDataset shard;
    shard.dim = source.dim;
    shard.class_count = source.class_count;
    for (std::size_t i = 0; i < lnum; ++i) {
      const auto& pool = by_class[picked[i]];
      for (long s = 0; s < counts[i]; ++s) {
        const auto j = pool[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
        const double* r = source.row(j);
        shard.features.insert(shard.features.end(), r, r + source.dim);
        shard.labels.push_back(source.labels[j]);
      }
    }
    shards.push_back(std::move(shard));
  }
  return shards;
}

LabeledDataset synth_gaussian(int classes, int dim, int per_class, double separation,
                              std::uint64_t seed) {
  if (classes < 1 || dim < 1 || per_class < 1)
    throw ConfigError("synth: classes, dim and per_class must be positive");
  if (separation < 0.0) throw ConfigError("synth: separation must be non-negative");
  if (dim != 2 && dim < classes)
    throw ConfigError("synth: need dim == 2 or dim >= classes for the mean layout");

  std::vector<std::vector<double>> means(static_cast<std::size_t>(classes),
                                         std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  if (dim == 2) {
    const double r = separation / 2.0;
    for (int c = 0; c < classes; ++c) {
      const double angle = 2.0 * std::numbers::pi * c / classes;
      means[static_cast<std::size_t>(c)][0] = r * std::cos(angle);
      means[static_cast<std::size_t>(c)][1] = r * std::sin(angle);
    }
  } else {
    for (int c = 0; c < classes; ++c) means[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = separation;
  }

  Rng rng(derive_seed(seed, 0x73796e7468ULL /* "synth" */));
  LabeledDataset data;
  data.dim = dim;
  data.class_count = classes;
  data.features.reserve(static_cast<std::size_t>(classes) * per_class * dim);
  data.labels.reserve(static_cast<std::size_t>(classes) * per_class);
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      for (int j = 0; j < dim; ++j)
        data.features.push_back(means[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] + rng.normal());
      data.labels.push_back(c);
    }
  }
  return data;
}

namespace {

std::uint32_t read_be32(std::ifstream& f, const std::string& path, std::size_t& offset) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (f.gcount() != 4)
    throw FormatError("idx: " + path + ": truncated at byte offset " + std::to_string(offset));
  offset += 4;
  return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
         (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw FormatError("idx: cannot open " + images_path);
  std::ifstream lbl(labels_path, std::ios::binary);
  if (!lbl) throw FormatError("idx: cannot open " + labels_path);

  std::size_t img_off = 0, lbl_off = 0;
  const auto img_magic = read_be32(img, images_path, img_off);
  if (img_magic != 0x00000803u)
    throw FormatError("idx: " + images_path + ": bad magic " + std::to_string(img_magic) +
                      " at byte offset 0 (expected 2051)");
  const auto count = read_be32(img, images_path, img_off);
  const auto rows = read_be32(img, images_path, img_off);
  const auto cols = read_be32(img, images_path, img_off);

  const auto lbl_magic = read_be32(lbl, labels_path, lbl_off);
  if (lbl_magic != 0x00000801u)
    throw FormatError("idx: " + labels_path + ": bad magic " + std::to_string(lbl_magic) +
                      " at byte offset 0 (expected 2049)");
  const auto lbl_count = read_be32(lbl, labels_path, lbl_off);
  if (lbl_count != count)
    throw FormatError("idx: label count " + std::to_string(lbl_count) + " does not match image count " +
                      std::to_string(count) + " (byte offset 4)");
  if (count == 0) throw FormatError("idx: " + images_path + ": zero items");

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  LabeledDataset data;
  data.dim = static_cast<int>(pixels);
  data.features.resize(static_cast<std::size_t>(count) * pixels);
  data.labels.resize(count);

  std::vector<unsigned char> buf(pixels);
  for (std::uint32_t i = 0; i < count; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
    if (img.gcount() != static_cast<std::streamsize>(pixels))
      throw FormatError("idx: " + images_path + ": truncated at byte offset " + std::to_string(img_off));
    img_off += pixels;
    for (std::size_t p = 0; p < pixels; ++p)
      data.features[i * pixels + p] = static_cast<double>(buf[p]) / 255.0;
  }

  int max_label = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    char c;
    lbl.read(&c, 1);
    if (lbl.gcount() != 1)
      throw FormatError("idx: " + labels_path + ": truncated at byte offset " + std::to_string(lbl_off));
    ++lbl_off;
    data.labels[i] = static_cast<unsigned char>(c);
    max_label = std::max(max_label, data.labels[i]);
  }
  data.class_count = max_label + 1;
  return data;
}

}  // namespace kasync
