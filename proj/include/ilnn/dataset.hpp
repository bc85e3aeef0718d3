#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ilnn/rng.hpp"
#include "ilnn/tensor.hpp"

namespace ilnn {

/// Labeled feature matrix, one sample per row.
struct Dataset {
  Tensor features;  // rank 2: samples x dim
  std::vector<std::uint32_t> labels;
  std::size_t class_count = 0;
  std::string split;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.shape()[1]; }
  std::vector<double> row(std::size_t i) const;

  /// Labels in range, finite features, shapes consistent.
  void validate() const;
};

struct SyntheticSpec {
  int depth = 2;
  int branching = 3;
  int dim = 16;
  int samples_per_leaf = 50;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Balanced b-ary tree of Gaussian directions: every non-root node draws a
/// direction, each leaf class emits samples around the sum of directions
/// along its path, plus isotropic noise. Returns a stratified 80/20
/// train/test split, deterministic in the seed.
std::pair<Dataset, Dataset> gen_synthetic_hierarchy(const SyntheticSpec& spec);

// --------------------------------------------------------------------------
// Binary tensor container: magic "ILNN", format version u16, rank u16, dims
// u64 little-endian, then the values as 64-bit little-endian reals. Labels
// travel in a sidecar file of raw u32 little-endian values.
// --------------------------------------------------------------------------

inline constexpr std::uint16_t kContainerVersion = 1;

void write_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor_file(const std::filesystem::path& path);

// In-memory forms, used by the checkpoint writer.
void append_tensor_record(std::vector<std::uint8_t>& out, const Tensor& t);
Tensor parse_tensor_record(const std::vector<std::uint8_t>& bytes, std::size_t& offset);

void write_labels_file(const std::filesystem::path& path, const std::vector<std::uint32_t>& labels);
std::vector<std::uint32_t> read_labels_file(const std::filesystem::path& path);

/// Writes <split>_features.ilnn / <split>_labels.u32 under `dir`.
void write_dataset_split(const std::filesystem::path& dir, const Dataset& ds);

/// Loads a split from `dir`, preferring the binary pair and falling back to
/// <split>.csv (header "label,f0,f1,...").
Dataset load_dataset_split(const std::filesystem::path& dir, const std::string& split);

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset_csv(const std::filesystem::path& path, const std::string& split);

}  // namespace ilnn
