#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ilnn/metrics.hpp"
#include "ilnn/model.hpp"

namespace ilnn {

/// Flat run settings. Every run is reproducible: the seed is mandatory and
/// all randomness derives from it.
struct RunConfig {
  std::string task;  // train | eval | bench-norm | export-embeddings | gen-synthetic

  std::string dataset_dir;
  std::string out_dir = "out";
  std::string checkpoint;  // eval/export; defaults to <out>/checkpoint.ilnn

  std::string model = "mlp";     // mlp | cnn
  std::string head = "plfc";     // plfc | lfc
  std::string norm = "gyrolbn";  // gyrolbn | gyrobn-iterN | none
  std::vector<std::size_t> hidden;

  double curvature = -1.0;
  int epochs = 50;
  int batch_size = 32;
  double lr = 0.05;
  std::vector<int> lr_drop_epochs;
  double lr_drop_gamma = 0.2;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  double dropout_p = 0.05;
  bool track_running = true;

  std::uint64_t seed = 0;
  bool seed_set = false;

  // gen-synthetic
  int synth_depth = 2;
  int synth_branching = 3;
  int synth_dim = 16;
  int synth_samples_per_leaf = 50;
  double synth_noise = 0.1;

  // bench-norm
  int bench_batch = 256;
  int bench_dim = 64;
  int bench_reps = 20;

  void validate() const;
  ModelConfig model_config(std::size_t input_dim, std::size_t classes) const;
  std::filesystem::path checkpoint_path() const;
};

/// key=value lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

/// Applies keys onto a config; unknown keys are configuration errors.
void apply_config_entries(RunConfig& config,
                          const std::map<std::string, std::string>& entries);

/// Canonical text form of every effective setting, and its FNV-1a hash.
std::string canonical_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

// --------------------------------------------------------------------------
// Checkpoints: "ILNNCKPT" magic, u16 version, u64 config hash, u32 section
// count, then named sections each holding one tensor container record.
// --------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<NamedTensor>& sections, std::uint64_t config_hash);

struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::vector<NamedTensor> sections;

  const Tensor& section(const std::string& name) const;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);
Classifier model_from_checkpoint(const Checkpoint& ckpt);

// --------------------------------------------------------------------------
// Tasks
// --------------------------------------------------------------------------

struct EpochRow {
  int epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double test_mcc = 0.0;
};

struct TrainReport {
  std::vector<EpochRow> rows;
  std::filesystem::path metrics_path;
  std::filesystem::path checkpoint_path;
};

TrainReport train(const RunConfig& config);

struct EvalResult {
  double accuracy = 0.0;
  double mcc = 0.0;
  std::vector<std::uint32_t> predictions;
};

/// Batched eval-mode pass over a dataset.
EvalResult evaluate_model(Classifier& model, const Dataset& ds, int batch_size);

/// Loads the checkpoint named by the config and scores the test split.
EvalResult evaluate(const RunConfig& config);

/// One loss/backward/step cycle over a single batch; returns the batch loss.
/// Shared by the epoch loop and the gradient-flow tests.
double train_step(Classifier& model, RsgdOptimizer& optimizer, const Dataset& ds,
                  const std::vector<std::size_t>& indices, Rng& dropout_rng);

/// Mean softmax cross-entropy of a forward pass (no parameter updates).
double batch_loss_value(Classifier& model, const Dataset& ds,
                        const std::vector<std::size_t>& indices, Mode mode, Rng& dropout_rng);

struct BenchRecord {
  std::string variant;
  double median_ms = 0.0;
  double iqr_ms = 0.0;
};

/// Times the closed-form normalizer against the iterative variant at
/// budgets {1,2,5,10,converge} on identical synthetic batches and writes a
/// per-variant report.
std::vector<BenchRecord> bench_norm(const RunConfig& config);

/// Writes one CSV row per test sample: label, prediction, Poincare
/// coordinates of the penultimate embedding, then its tangent coordinates.
std::filesystem::path export_embeddings(const RunConfig& config);

/// Generates the synthetic hierarchy dataset into the output directory.
void run_gen_synthetic(const RunConfig& config);

}  // namespace ilnn
