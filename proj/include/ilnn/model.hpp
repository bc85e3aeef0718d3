#pragma once

#include <string>
#include <vector>

#include "ilnn/dataset.hpp"
#include "ilnn/layers.hpp"
#include "ilnn/optim.hpp"

namespace ilnn {

/// Lifts a Euclidean feature vector onto the manifold: exp at the pole of
/// the tangent vector (0, features).
LorentzPoint embed_input(const Tensor& features, Curvature curvature);
LorentzPoint embed_input(const std::vector<double>& features, Curvature curvature);

enum class HeadKind { plfc, lfc };

struct NormSpec {
  enum class Kind { gyrolbn, gyrobn, none };
  Kind kind = Kind::gyrolbn;
  int iters = 1;  // Karcher steps for the gyrobn variant
};

struct ModelConfig {
  std::string preset = "mlp";        // mlp | cnn
  std::size_t input_dim = 0;
  std::size_t classes = 0;
  std::vector<std::size_t> hidden;   // mlp widths / cnn channel progression
  HeadKind head = HeadKind::plfc;
  NormSpec norm;
  double dropout_p = 0.05;
  double curvature = -1.0;
  bool track_running = true;

  Curvature curv() const { return Curvature(curvature); }
};

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// One trainable slot, pointing into model-owned storage.
struct ParamRef {
  std::string name;
  bool lorentz = false;
  Tensor* tensor = nullptr;
  LorentzPoint* point = nullptr;
  bool weight_decay = false;
  ParamConstraint constraint = ParamConstraint::none;
};

/// Desk-scale classifier over hyperboloid features.
///
/// mlp: embed -> [PLFC (+gyro-bias) -> norm -> L-ReLU -> dropout] x L -> head
/// cnn: embed per pixel -> [L-conv -> norm -> L-ReLU -> dropout] x 2
///      -> global centroid pool -> head
///
/// The head is either the margin-preserving hyperplane-distance classifier
/// (plfc) or the extrinsic baseline that applies an ambient linear map and
/// reads asinh distance logits (lfc).
class Classifier {
 public:
  static Classifier build(const ModelConfig& config, Rng& init_rng);

  struct BatchOutput {
    std::vector<Tensor> logits;             // one rank-1 tensor per sample
    std::vector<LorentzPoint> penultimate;  // head inputs
  };

  /// Forward for the selected rows. Train mode consumes dropout draws and
  /// updates running normalization statistics.
  BatchOutput forward_batch(const Dataset& ds, const std::vector<std::size_t>& indices,
                            Mode mode, Rng& dropout_rng);

  std::vector<ParamRef> param_refs();

  /// Every tensor needed to restore the model: parameters, normalization
  /// state, and a meta section describing the architecture.
  std::vector<NamedTensor> state_sections() const;
  void load_state_sections(const std::vector<NamedTensor>& sections);

  const ModelConfig& config() const { return config_; }

  static Tensor encode_model_meta(const ModelConfig& config);
  static ModelConfig decode_model_meta(const Tensor& meta);

 private:
  struct Block {
    HyperplaneParams fc;
    LorentzPoint bias;
    NormState norm;
    Block(HyperplaneParams fc_, LorentzPoint bias_, NormState norm_)
        : fc(std::move(fc_)), bias(std::move(bias_)), norm(std::move(norm_)) {}
  };

  explicit Classifier(ModelConfig config) : config_(std::move(config)) {}

  std::vector<LorentzPoint> trunk_mlp(const std::vector<LorentzPoint>& batch, Mode mode,
                                      Rng& dropout_rng);
  std::vector<LorentzPoint> trunk_cnn(const std::vector<LorentzPoint>& batch, Mode mode,
                                      Rng& dropout_rng, std::size_t grid_side);
  std::vector<LorentzPoint> apply_norm(std::vector<LorentzPoint> batch, std::size_t block_idx,
                                       Mode mode);
  Tensor head_logits(const LorentzPoint& x);

  ModelConfig config_;
  std::vector<Block> blocks_;
  HyperplaneParams head_;  // plfc head
  Tensor lfc_W_;           // lfc head, classes x (1 + last_dim)
  std::size_t last_dim_ = 0;
};

}  // namespace ilnn
