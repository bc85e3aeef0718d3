#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ilnn/dataset.hpp"
#include "ilnn/errors.hpp"

using namespace ilnn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() / (std::string("ilnn_test_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("tensor container: pinned byte layout") {
  fs::path dir = temp_dir("container");
  Tensor t = Tensor::from_data({2, 3}, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  write_tensor_file(dir / "t.ilnn", t);

  std::ifstream in(dir / "t.ilnn", std::ios::binary);
  std::vector<unsigned char> bytes(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>{});
  REQUIRE(bytes.size() == 4 + 2 + 2 + 2 * 8 + 6 * 8);
  CHECK(bytes[0] == 'I');
  CHECK(bytes[1] == 'L');
  CHECK(bytes[2] == 'N');
  CHECK(bytes[3] == 'N');
  CHECK(bytes[4] == 1);  // version u16 little-endian
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 2);  // rank
  CHECK(bytes[7] == 0);
  CHECK(bytes[8] == 2);  // dims[0] = 2 as u64 LE
  for (int i = 9; i < 16; ++i) CHECK(bytes[i] == 0);
  CHECK(bytes[16] == 3);  // dims[1] = 3
  // First payload value 1.0 = 0x3FF0000000000000 little-endian.
  CHECK(bytes[24 + 6] == 0xF0);
  CHECK(bytes[24 + 7] == 0x3F);

  Tensor back = read_tensor_file(dir / "t.ilnn");
  CHECK(back.shape() == t.shape());
  CHECK(back.data() == t.data());
}

TEST_CASE("labels sidecar and dataset split round trip") {
  fs::path dir = temp_dir("split");
  Dataset ds;
  ds.features = Tensor::from_data({3, 2}, {0.5, -1.0, 2.0, 0.25, -3.5, 4.0});
  ds.labels = {0, 2, 1};
  ds.class_count = 3;
  ds.split = "train";
  write_dataset_split(dir, ds);

  Dataset back = load_dataset_split(dir, "train");
  CHECK(back.features.data() == ds.features.data());
  CHECK(back.labels == ds.labels);
  CHECK(back.class_count == 3);
  CHECK_THROWS_AS(load_dataset_split(dir, "test"), ConfigError);
}

TEST_CASE("csv loader accepts the documented header and round-trips") {
  fs::path dir = temp_dir("csv");
  Dataset ds;
  ds.features = Tensor::from_data({2, 3}, {1.5, 0.0, -2.25, 0.125, 3.0, -0.5});
  ds.labels = {1, 0};
  ds.class_count = 2;
  ds.split = "test";
  write_dataset_csv(dir / "test.csv", ds);
  Dataset back = load_dataset_split(dir, "test");
  CHECK(back.features.data() == ds.features.data());
  CHECK(back.labels == ds.labels);

  std::ofstream bad(dir / "bad.csv");
  bad << "not_a_header\n1,2,3\n";
  bad.close();
  CHECK_THROWS_AS(read_dataset_csv(dir / "bad.csv", "test"), ConfigError);
}

TEST_CASE("synthetic hierarchy: class count, split sizes, determinism") {
  SyntheticSpec spec;
  spec.depth = 2;
  spec.branching = 3;
  spec.dim = 8;
  spec.samples_per_leaf = 10;
  spec.noise = 0.1;
  spec.seed = 7;

  auto [train, test] = gen_synthetic_hierarchy(spec);
  CHECK(train.class_count == 9);  // b^d leaves
  CHECK(test.class_count == 9);
  CHECK(train.size() == 9 * 8);   // 80% of 10 per class
  CHECK(test.size() == 9 * 2);

  auto [train2, test2] = gen_synthetic_hierarchy(spec);
  CHECK(train.features.data() == train2.features.data());
  CHECK(test.features.data() == test2.features.data());
  CHECK(train.labels == train2.labels);

  SyntheticSpec other = spec;
  other.seed = 8;
  auto [train3, test3] = gen_synthetic_hierarchy(other);
  CHECK(train.features.data() != train3.features.data());
  (void)test3;

  CHECK_THROWS_AS(gen_synthetic_hierarchy(SyntheticSpec{1, 3, 8, 10, 0.1, 1}), ConfigError);
}

TEST_CASE("noiseless synthetic data is separated by nearest class prototype") {
  SyntheticSpec spec;
  spec.depth = 2;
  spec.branching = 3;
  spec.dim = 8;
  spec.samples_per_leaf = 10;
  spec.noise = 0.0;
  spec.seed = 13;
  auto [train, test] = gen_synthetic_hierarchy(spec);

  // Class prototypes from the train split.
  const std::size_t k = train.class_count, d = train.dim();
  std::vector<double> proto(k * d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto row = train.row(i);
    for (std::size_t j = 0; j < d; ++j) proto[train.labels[i] * d + j] += row[j];
    ++counts[train.labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j) proto[c * d + j] /= double(counts[c]);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto row = test.row(i);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < k; ++c) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = row[j] - proto[c * d + j];
        dist += diff * diff;
      }
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    if (best == test.labels[i]) ++correct;
  }
  CHECK(correct == test.size());
}

TEST_CASE("dataset validation rejects bad labels and non-finite features") {
  Dataset ds;
  ds.features = Tensor::from_data({1, 2}, {1.0, 2.0});
  ds.labels = {5};
  ds.class_count = 3;
  ds.split = "train";
  CHECK_THROWS_AS(ds.validate(), ConfigError);

  ds.labels = {0};
  ds.features = Tensor::from_data({1, 2}, {1.0, std::nan("")});
  CHECK_THROWS_AS(ds.validate(), NumericDomainError);
}
