#include "ilnn/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ilnn/errors.hpp"

namespace ilnn {

namespace fs = std::filesystem;

// --------------------------------------------------------------------------
// Dataset
// --------------------------------------------------------------------------

std::vector<double> Dataset::row(std::size_t i) const {
  const std::size_t d = dim();
  const auto& v = features.data();
  if (i >= size()) throw ContractError("Dataset::row: index out of range");
  return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(i * d),
                             v.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
}

void Dataset::validate() const {
  if (features.rank() != 2) throw ConfigError("Dataset: features must be a rank-2 tensor");
  if (features.shape()[0] != labels.size()) {
    throw ConfigError("Dataset: label count must match feature rows");
  }
  if (!features.all_finite()) throw NumericDomainError("Dataset: non-finite feature");
  for (std::uint32_t l : labels) {
    if (l >= class_count) throw ConfigError("Dataset: label outside [0, class_count)");
  }
}

// --------------------------------------------------------------------------
// Synthetic hierarchy
// --------------------------------------------------------------------------

std::pair<Dataset, Dataset> gen_synthetic_hierarchy(const SyntheticSpec& spec) {
  if (spec.depth < 2 || spec.branching < 2) {
    throw ConfigError("gen_synthetic_hierarchy: depth and branching must be >= 2");
  }
  if (spec.dim < 1 || spec.samples_per_leaf < 2) {
    throw ConfigError("gen_synthetic_hierarchy: dim >= 1 and samples_per_leaf >= 2 required");
  }
  if (spec.noise < 0.0) throw ConfigError("gen_synthetic_hierarchy: noise must be nonnegative");

  const std::size_t n = static_cast<std::size_t>(spec.dim);
  const std::size_t b = static_cast<std::size_t>(spec.branching);
  const std::size_t d = static_cast<std::size_t>(spec.depth);
  std::size_t classes = 1;
  for (std::size_t level = 0; level < d; ++level) classes *= b;

  Rng rng(spec.seed);
  Rng dir_rng = rng.fork(1);
  Rng noise_rng = rng.fork(2);

  // Directions for all non-root nodes, level by level in node order.
  const double dir_scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<std::vector<double>> level_dirs(d);
  std::size_t level_count = 1;
  for (std::size_t level = 0; level < d; ++level) {
    level_count *= b;
    level_dirs[level].resize(level_count * n);
    for (double& v : level_dirs[level]) v = dir_scale * dir_rng.normal();
  }

  // Leaf prototype = sum of the directions along its root-to-leaf path.
  std::vector<double> prototypes(classes * n, 0.0);
  for (std::size_t leaf = 0; leaf < classes; ++leaf) {
    // Node ids at level L along the path are leaf / b^(d-1-L).
    std::vector<std::size_t> path(d);
    std::size_t id = leaf;
    for (std::size_t back = 0; back < d; ++back) {
      path[d - 1 - back] = id;
      id /= b;
    }
    for (std::size_t level = 0; level < d; ++level) {
      const double* dir = &level_dirs[level][path[level] * n];
      for (std::size_t j = 0; j < n; ++j) prototypes[leaf * n + j] += dir[j];
    }
  }

  const std::size_t s = static_cast<std::size_t>(spec.samples_per_leaf);
  const std::size_t train_per_class = (4 * s) / 5;
  std::vector<double> train_rows, test_rows;
  std::vector<std::uint32_t> train_labels, test_labels;
  train_rows.reserve(classes * train_per_class * n);
  test_rows.reserve(classes * (s - train_per_class) * n);

  std::vector<double> sample(n);
  for (std::size_t leaf = 0; leaf < classes; ++leaf) {
    for (std::size_t k = 0; k < s; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        sample[j] = prototypes[leaf * n + j] + spec.noise * noise_rng.normal();
      }
      const bool is_train = k < train_per_class;
      auto& rows = is_train ? train_rows : test_rows;
      auto& labels = is_train ? train_labels : test_labels;
      rows.insert(rows.end(), sample.begin(), sample.end());
      labels.push_back(static_cast<std::uint32_t>(leaf));
    }
  }

  Dataset train{Tensor::from_data({train_labels.size(), n}, std::move(train_rows)),
                std::move(train_labels), classes, "train"};
  Dataset test{Tensor::from_data({test_labels.size(), n}, std::move(test_rows)),
               std::move(test_labels), classes, "test"};
  train.validate();
  test.validate();
  return {std::move(train), std::move(test)};
}

// --------------------------------------------------------------------------
// Binary container
// --------------------------------------------------------------------------

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint16_t get_u16(const std::vector<std::uint8_t>& in, std::size_t& off) {
  if (off + 2 > in.size()) throw ConfigError("container: truncated u16");
  std::uint16_t v = static_cast<std::uint16_t>(in[off] | (in[off + 1] << 8));
  off += 2;
  return v;
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t& off) {
  if (off + 8 > in.size()) throw ConfigError("container: truncated u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[off + i]) << (8 * i);
  off += 8;
  return v;
}

double get_f64(const std::vector<std::uint8_t>& in, std::size_t& off) {
  return std::bit_cast<double>(get_u64(in, off));
}

std::vector<std::uint8_t> read_all_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_all_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write failed: " + path.string());
}

}  // namespace

void append_tensor_record(std::vector<std::uint8_t>& out, const Tensor& t) {
  out.push_back('I');
  out.push_back('L');
  out.push_back('N');
  out.push_back('N');
  put_u16(out, kContainerVersion);
  put_u16(out, static_cast<std::uint16_t>(t.rank()));
  for (std::size_t d : t.shape()) put_u64(out, static_cast<std::uint64_t>(d));
  for (double v : t.data()) put_f64(out, v);
}

Tensor parse_tensor_record(const std::vector<std::uint8_t>& bytes, std::size_t& offset) {
  if (offset + 4 > bytes.size() || bytes[offset] != 'I' || bytes[offset + 1] != 'L' ||
      bytes[offset + 2] != 'N' || bytes[offset + 3] != 'N') {
    throw ConfigError("container: bad magic");
  }
  offset += 4;
  const std::uint16_t version = get_u16(bytes, offset);
  if (version != kContainerVersion) {
    throw ConfigError("container: unsupported version " + std::to_string(version));
  }
  const std::uint16_t rank = get_u16(bytes, offset);
  Shape shape(rank);
  for (std::uint16_t i = 0; i < rank; ++i) {
    shape[i] = static_cast<std::size_t>(get_u64(bytes, offset));
  }
  const std::size_t count = shape_size(shape);
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = get_f64(bytes, offset);
  return Tensor::from_data(std::move(shape), std::move(values));
}

void write_tensor_file(const fs::path& path, const Tensor& t) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + 8 * t.rank() + 8 * t.size());
  append_tensor_record(bytes, t);
  write_all_bytes(path, bytes);
}

Tensor read_tensor_file(const fs::path& path) {
  const auto bytes = read_all_bytes(path);
  std::size_t offset = 0;
  Tensor t = parse_tensor_record(bytes, offset);
  if (offset != bytes.size()) throw ConfigError("container: trailing bytes in " + path.string());
  return t;
}

void write_labels_file(const fs::path& path, const std::vector<std::uint32_t>& labels) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(labels.size() * 4);
  for (std::uint32_t v : labels) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
  write_all_bytes(path, bytes);
}

std::vector<std::uint32_t> read_labels_file(const fs::path& path) {
  const auto bytes = read_all_bytes(path);
  if (bytes.size() % 4 != 0) throw ConfigError("labels file size is not a multiple of 4");
  std::vector<std::uint32_t> labels(bytes.size() / 4);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    labels[i] = v;
  }
  return labels;
}

void write_dataset_split(const fs::path& dir, const Dataset& ds) {
  fs::create_directories(dir);
  write_tensor_file(dir / (ds.split + "_features.ilnn"), ds.features);
  write_labels_file(dir / (ds.split + "_labels.u32"), ds.labels);
}

Dataset load_dataset_split(const fs::path& dir, const std::string& split) {
  const fs::path feat = dir / (split + "_features.ilnn");
  const fs::path lab = dir / (split + "_labels.u32");
  if (fs::exists(feat) && fs::exists(lab)) {
    Dataset ds;
    ds.features = read_tensor_file(feat);
    ds.labels = read_labels_file(lab);
    ds.split = split;
    std::uint32_t max_label = 0;
    for (std::uint32_t l : ds.labels) max_label = std::max(max_label, l);
    ds.class_count = ds.labels.empty() ? 0 : static_cast<std::size_t>(max_label) + 1;
    ds.validate();
    return ds;
  }
  const fs::path csv = dir / (split + ".csv");
  if (fs::exists(csv)) return read_dataset_csv(csv, split);
  throw ConfigError("dataset split '" + split + "' not found under " + dir.string());
}

void write_dataset_csv(const fs::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << "label";
  for (std::size_t j = 0; j < ds.dim(); ++j) out << ",f" << j;
  out << "\n";
  char buf[32];
  const auto& v = ds.features.data();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i * ds.dim() + j]);
      out << ',' << buf;
    }
    out << "\n";
  }
}

Dataset read_dataset_csv(const fs::path& path, const std::string& split) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: empty file " + path.string());
  if (line.rfind("label", 0) != 0) {
    throw ConfigError("csv: expected header starting with 'label', got: " + line);
  }
  std::vector<double> values;
  std::vector<std::uint32_t> labels;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) throw ConfigError("csv: malformed row");
    labels.push_back(static_cast<std::uint32_t>(std::stoul(cell)));
    std::size_t row_dim = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++row_dim;
    }
    if (dim == 0) {
      dim = row_dim;
    } else if (dim != row_dim) {
      throw ConfigError("csv: ragged rows");
    }
  }
  if (labels.empty() || dim == 0) throw ConfigError("csv: no data rows in " + path.string());
  Dataset ds;
  ds.features = Tensor::from_data({labels.size(), dim}, std::move(values));
  ds.labels = std::move(labels);
  std::uint32_t max_label = 0;
  for (std::uint32_t l : ds.labels) max_label = std::max(max_label, l);
  ds.class_count = static_cast<std::size_t>(max_label) + 1;
  ds.split = split;
  ds.validate();
  return ds;
}

}  // namespace ilnn
