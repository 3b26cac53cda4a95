#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "kasync/datagen.hpp"
#include "kasync/errors.hpp"
#include "test_util.hpp"

using namespace kasync;

namespace {

LabeledDataset toy_source(int classes, int per_class, int dim = 2) {
  LabeledDataset d;
  d.dim = dim;
  d.class_count = classes;
  Rng rng(99);
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      for (int j = 0; j < dim; ++j) d.features.push_back(rng.normal() + c);
      d.labels.push_back(c);
    }
  return d;
}

std::set<int> distinct_labels(const LabeledDataset& d) {
  return {d.labels.begin(), d.labels.end()};
}

}  // namespace

TEST_CASE("labels_per_client = 1 gives single-label shards") {
  const auto source = toy_source(4, 50);
  PartitionSpec spec{/*clients=*/8, /*labels_per_client=*/1, 10, 30, 7};
  const auto shards = partition_non_iid(source, spec);
  REQUIRE(shards.size() == 8);
  for (const auto& s : shards) {
    CHECK(distinct_labels(s).size() == 1);
    CHECK(s.size() >= 10);
    CHECK(s.size() <= 30);
  }
}

TEST_CASE("labels_per_client = class count allows every label") {
  const auto source = toy_source(3, 40);
  PartitionSpec spec{4, 3, 12, 20, 11};
  const auto shards = partition_non_iid(source, spec);
  for (const auto& s : shards) CHECK(distinct_labels(s).size() == 3);
}

TEST_CASE("degenerate count bounds give exact shard sizes") {
  const auto source = toy_source(5, 60);
  PartitionSpec spec{10, 2, 100, 100, 3};
  const auto shards = partition_non_iid(source, spec);
  REQUIRE(shards.size() == 10);
  for (const auto& s : shards) CHECK(s.size() == 100);
}

TEST_CASE("partition invariants hold across random specs") {
  const auto source = toy_source(6, 30, 3);
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    PartitionSpec spec;
    spec.clients = static_cast<int>(rng.uniform_int(1, 12));
    spec.labels_per_client = static_cast<int>(rng.uniform_int(1, 6));
    spec.min_samples = static_cast<int>(rng.uniform_int(spec.labels_per_client, 40));
    spec.max_samples = spec.min_samples + static_cast<int>(rng.uniform_int(0, 40));
    spec.seed = rng.next_u64();
    const auto shards = partition_non_iid(source, spec);
    for (const auto& s : shards) {
      const auto labels = distinct_labels(s);
      REQUIRE(static_cast<int>(labels.size()) == spec.labels_per_client);
      for (int l : labels) REQUIRE(l < source.class_count);
      REQUIRE(s.size() >= static_cast<std::size_t>(spec.min_samples));
      REQUIRE(s.size() <= static_cast<std::size_t>(spec.max_samples));
    }
  }
}

TEST_CASE("identical partition specs give identical shards") {
  const auto source = toy_source(4, 30);
  PartitionSpec spec{6, 2, 15, 25, 42};
  const auto a = partition_non_iid(source, spec);
  const auto b = partition_non_iid(source, spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].labels == b[i].labels);
    CHECK(a[i].features == b[i].features);
  }
}

TEST_CASE("partition rejects impossible label requests") {
  const auto source = toy_source(3, 20);
  PartitionSpec spec{2, 4, 10, 20, 1};
  CHECK_THROWS_AS(partition_non_iid(source, spec), UsageError);
}

TEST_CASE("an empty source class is reported by name") {
  LabeledDataset source = toy_source(2, 20);
  source.class_count = 3;  // class 2 exists in the schema but has no samples
  PartitionSpec spec{4, 3, 10, 15, 1};
  try {
    partition_non_iid(source, spec);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("class 2") != std::string::npos);
  }
}

TEST_CASE("synthetic gaussians are deterministic per seed") {
  const auto a = synth_gaussian(3, 4, 50, 2.0, 77);
  const auto b = synth_gaussian(3, 4, 50, 2.0, 77);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  const auto c = synth_gaussian(3, 4, 50, 2.0, 78);
  CHECK(a.features != c.features);
}

TEST_CASE("zero separation is unlearnable, large separation is easy") {
  const ModelSpec spec{ModelKind::logistic, 2, 2, 0};

  const auto blind = synth_gaussian(2, 2, 400, 0.0, 5);
  const auto blind_test = synth_gaussian(2, 2, 400, 0.0, 6);
  auto w = testutil::train_sgd(spec, blind, 600, 0.3, 16, 1);
  const double acc0 = evaluate_accuracy(spec, w, blind_test);
  CHECK(std::fabs(acc0 - 0.5) < 0.12);  // indistinguishable classes hover at 1/C

  const auto easy = synth_gaussian(2, 2, 400, 10.0, 5);
  const auto easy_test = synth_gaussian(2, 2, 400, 10.0, 6);
  w = testutil::train_sgd(spec, easy, 600, 0.3, 16, 1);
  CHECK(evaluate_accuracy(spec, w, easy_test) > 0.99);
}

TEST_CASE("idx round-trip on a hand-built fixture") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "kasync_idx_test";
  fs::create_directories(dir);
  const auto img_path = (dir / "images.idx").string();
  const auto lbl_path = (dir / "labels.idx").string();

  // 2 images of 2x2 pixels: {0,1,2,3} and {252,253,254,255}
  const unsigned char img_bytes[] = {
      0x00, 0x00, 0x08, 0x03, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
      0x00, 0x00, 0x00, 0x02, 0,    1,    2,    3,    252,  253,  254,  255};
  const unsigned char lbl_bytes[] = {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x02, 1, 0};
  std::ofstream(img_path, std::ios::binary)
      .write(reinterpret_cast<const char*>(img_bytes), sizeof(img_bytes));
  std::ofstream(lbl_path, std::ios::binary)
      .write(reinterpret_cast<const char*>(lbl_bytes), sizeof(lbl_bytes));

  const auto data = load_idx(img_path, lbl_path);
  REQUIRE(data.size() == 2);
  CHECK(data.dim == 4);
  CHECK(data.features[0] == 0.0);
  CHECK(data.features[1] == doctest::Approx(1.0 / 255.0));
  CHECK(data.features[7] == doctest::Approx(1.0));
  CHECK(data.labels[0] == 1);
  CHECK(data.labels[1] == 0);
  CHECK(data.class_count == 2);

  SUBCASE("count mismatch is a format error") {
    const unsigned char short_lbl[] = {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x01, 1};
    std::ofstream(lbl_path, std::ios::binary)
        .write(reinterpret_cast<const char*>(short_lbl), sizeof(short_lbl));
    CHECK_THROWS_AS(load_idx(img_path, lbl_path), FormatError);
  }

  SUBCASE("empty file is a format error") {
    std::ofstream(img_path, std::ios::binary | std::ios::trunc);
    CHECK_THROWS_AS(load_idx(img_path, lbl_path), FormatError);
  }

  SUBCASE("bad magic reports the offset") {
    const unsigned char bad[] = {0x00, 0x00, 0x08, 0x04, 0x00, 0x00, 0x00, 0x02};
    std::ofstream(img_path, std::ios::binary)
        .write(reinterpret_cast<const char*>(bad), sizeof(bad));
    try {
      load_idx(img_path, lbl_path);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
    }
  }
}

TEST_CASE("truncated image payload reports the failing offset") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "kasync_idx_test2";
  fs::create_directories(dir);
  const auto img_path = (dir / "images.idx").string();
  const auto lbl_path = (dir / "labels.idx").string();
  const unsigned char img_bytes[] = {0x00, 0x00, 0x08, 0x03, 0x00, 0x00, 0x00, 0x02,
                                     0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
                                     0,    1,    2,    3,    252};  // second image cut short
  const unsigned char lbl_bytes[] = {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x02, 1, 0};
  std::ofstream(img_path, std::ios::binary)
      .write(reinterpret_cast<const char*>(img_bytes), sizeof(img_bytes));
  std::ofstream(lbl_path, std::ios::binary)
      .write(reinterpret_cast<const char*>(lbl_bytes), sizeof(lbl_bytes));
  CHECK_THROWS_AS(load_idx(img_path, lbl_path), FormatError);
}
