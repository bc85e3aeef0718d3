#include "ilnn/model.hpp"

#include <cmath>

namespace ilnn {

LorentzPoint embed_input(const Tensor& features, Curvature curvature) {
  if (features.rank() != 1 || features.size() < 1) {
    throw DimensionError("embed_input: rank-1 feature vector expected");
  }
  if (!features.all_finite()) throw NumericDomainError("embed_input: non-finite feature");
  LorentzPoint pole = origin(curvature, features.size());
  Tensor components = concat({Tensor::zeros({1}), features});
  return exp_map(pole, unchecked_tangent(pole, std::move(components)));
}

LorentzPoint embed_input(const std::vector<double>& features, Curvature curvature) {
  return embed_input(Tensor::from_vector(features), curvature);
}

// --------------------------------------------------------------------------
// Construction
// --------------------------------------------------------------------------

Classifier Classifier::build(const ModelConfig& config, Rng& init_rng) {
  if (config.input_dim == 0 || config.classes < 2) {
    throw ConfigError("Classifier: input_dim >= 1 and classes >= 2 required");
  }
  if (config.preset != "mlp" && config.preset != "cnn") {
    throw ConfigError("Classifier: unknown preset '" + config.preset + "'");
  }
  Classifier model(config);
  const Curvature curv = config.curv();

  if (config.preset == "mlp") {
    std::vector<std::size_t> widths = config.hidden;
    if (widths.empty()) widths = {32, 32};
    std::size_t in = config.input_dim;
    for (std::size_t w : widths) {
      if (w == 0) throw ConfigError("Classifier: zero hidden width");
      Block block(HyperplaneParams::init(w, in, init_rng), origin(curv, w),
                  NormState::init(curv, w, 0.1, 1e-5, config.track_running));
      model.blocks_.push_back(std::move(block));
      in = w;
    }
    model.last_dim_ = in;
  } else {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(
        static_cast<double>(config.input_dim))));
    if (side * side != config.input_dim) {
      throw ConfigError("Classifier: cnn preset needs a square feature count");
    }
    std::vector<std::size_t> channels = config.hidden;
    if (channels.empty()) channels = {8, 16};
    std::size_t in_ch = 1;  // scalar pixels embed into L^1
    for (std::size_t ch : channels) {
      if (ch == 0) throw ConfigError("Classifier: zero channel width");
      Block block(HyperplaneParams::init(ch, 9 * in_ch, init_rng), origin(curv, ch),
                  NormState::init(curv, ch, 0.1, 1e-5, config.track_running));
      model.blocks_.push_back(std::move(block));
      in_ch = ch;
    }
    model.last_dim_ = in_ch;
  }

  if (config.head == HeadKind::plfc) {
    model.head_ = HyperplaneParams::init(config.classes, model.last_dim_, init_rng);
  } else {
    const std::size_t cols = 1 + model.last_dim_;
    const double stdev = 1.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> w(config.classes * cols);
    for (double& v : w) v = stdev * init_rng.normal();
    model.lfc_W_ = Tensor::from_data({config.classes, cols}, std::move(w));
  }
  return model;
}

// --------------------------------------------------------------------------
// Forward
// --------------------------------------------------------------------------

std::vector<LorentzPoint> Classifier::apply_norm(std::vector<LorentzPoint> batch,
                                                 std::size_t block_idx, Mode mode) {
  NormState& state = blocks_[block_idx].norm;
  switch (config_.norm.kind) {
    case NormSpec::Kind::none:
      return batch;
    case NormSpec::Kind::gyrolbn:
      return gyrolbn_forward(batch, state, mode);
    case NormSpec::Kind::gyrobn:
      return gyrobn_forward(batch, state, mode, IterBudget::fixed(config_.norm.iters));
  }
  return batch;
}

std::vector<LorentzPoint> Classifier::trunk_mlp(const std::vector<LorentzPoint>& batch,
                                                Mode mode, Rng& dropout_rng) {
  std::vector<LorentzPoint> current = batch;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    std::vector<LorentzPoint> next;
    next.reserve(current.size());
    for (const LorentzPoint& x : current) {
      next.push_back(plfc_forward(x, blocks_[b].fc, blocks_[b].bias));
    }
    next = apply_norm(std::move(next), b, mode);
    for (LorentzPoint& x : next) {
      x = lorentz_relu(x);
      x = lorentz_dropout(x, config_.dropout_p, mode, dropout_rng);
    }
    current = std::move(next);
  }
  return current;
}

std::vector<LorentzPoint> Classifier::trunk_cnn(const std::vector<LorentzPoint>& batch,
                                                Mode mode, Rng& dropout_rng,
                                                std::size_t grid_side) {
  // `batch` holds per-pixel embeddings, grid_side^2 consecutive cells per
  // sample, each a point in L^1.
  const std::size_t cells = grid_side * grid_side;
  const std::size_t samples = batch.size() / cells;
  std::vector<FeatureMap> maps;
  maps.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    std::vector<LorentzPoint> pts(batch.begin() + static_cast<std::ptrdiff_t>(i * cells),
                                  batch.begin() + static_cast<std::ptrdiff_t>((i + 1) * cells));
    maps.push_back(FeatureMap::from_points(grid_side, grid_side, std::move(pts)));
  }

  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const ConvSpec spec{3, 3, b == 0 ? std::size_t{1} : std::size_t{2}, 1};
    for (FeatureMap& fm : maps) {
      fm = lorentz_conv(fm, blocks_[b].fc, spec, blocks_[b].bias);
    }
    // One statistics set per layer: normalize all positions of all samples
    // together.
    std::vector<LorentzPoint> flat;
    for (const FeatureMap& fm : maps) {
      flat.insert(flat.end(), fm.points.begin(), fm.points.end());
    }
    flat = apply_norm(std::move(flat), b, mode);
    std::size_t cursor = 0;
    for (FeatureMap& fm : maps) {
      for (LorentzPoint& p : fm.points) {
        LorentzPoint v = flat[cursor++];
        v = lorentz_relu(v);
        p = lorentz_dropout(v, config_.dropout_p, mode, dropout_rng);
      }
    }
  }

  std::vector<LorentzPoint> pooled;
  pooled.reserve(samples);
  for (const FeatureMap& fm : maps) {
    FeatureMap one = lorentz_avg_pool(fm, fm.height, fm.width, 1);
    pooled.push_back(one.points.front());
  }
  return pooled;
}

Tensor Classifier::head_logits(const LorentzPoint& x) {
  if (config_.head == HeadKind::plfc) {
    return mlr_logits(x, head_);
  }
  Tensor u = matmul(lfc_W_, x.coords());
  return lfc_head_forward(u, x.curvature()).second;
}

Classifier::BatchOutput Classifier::forward_batch(const Dataset& ds,
                                                  const std::vector<std::size_t>& indices,
                                                  Mode mode, Rng& dropout_rng) {
  if (ds.dim() != config_.input_dim) {
    throw ConfigError("forward_batch: dataset dimension does not match the model");
  }
  const Curvature curv = config_.curv();
  BatchOutput out;
  std::vector<LorentzPoint> embedded;

  if (config_.preset == "mlp") {
    embedded.reserve(indices.size());
    for (std::size_t idx : indices) {
      embedded.push_back(embed_input(ds.row(idx), curv));
    }
    out.penultimate = trunk_mlp(embedded, mode, dropout_rng);
  } else {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(
        static_cast<double>(config_.input_dim))));
    embedded.reserve(indices.size() * config_.input_dim);
    for (std::size_t idx : indices) {
      const std::vector<double> row = ds.row(idx);
      for (double pixel : row) {
        embedded.push_back(embed_input(Tensor::from_vector({pixel}), curv));
      }
    }
    out.penultimate = trunk_cnn(embedded, mode, dropout_rng, side);
  }

  out.logits.reserve(out.penultimate.size());
  for (const LorentzPoint& p : out.penultimate) {
    out.logits.push_back(head_logits(p));
  }
  return out;
}

// --------------------------------------------------------------------------
// Parameters and state
// --------------------------------------------------------------------------

std::vector<ParamRef> Classifier::param_refs() {
  std::vector<ParamRef> refs;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::string prefix = "block" + std::to_string(b) + ".";
    refs.push_back({prefix + "Z", false, &blocks_[b].fc.Z, nullptr, true,
                    ParamConstraint::row_norm_floor});
    refs.push_back({prefix + "a", false, &blocks_[b].fc.a, nullptr, false,
                    ParamConstraint::none});
    refs.push_back({prefix + "bias", true, nullptr, &blocks_[b].bias, false,
                    ParamConstraint::none});
    if (config_.norm.kind != NormSpec::Kind::none) {
      refs.push_back({prefix + "gamma", false, &blocks_[b].norm.gamma, nullptr, false,
                      ParamConstraint::positive_floor});
      refs.push_back({prefix + "beta", true, nullptr, &blocks_[b].norm.beta, false,
                      ParamConstraint::none});
    }
  }
  if (config_.head == HeadKind::plfc) {
    refs.push_back({"head.Z", false, &head_.Z, nullptr, true, ParamConstraint::row_norm_floor});
    refs.push_back({"head.a", false, &head_.a, nullptr, false, ParamConstraint::none});
  } else {
    refs.push_back({"head.W", false, &lfc_W_, nullptr, true, ParamConstraint::none});
  }
  return refs;
}

Tensor Classifier::encode_model_meta(const ModelConfig& config) {
  std::vector<double> meta;
  meta.push_back(config.preset == "mlp" ? 0.0 : 1.0);
  meta.push_back(static_cast<double>(config.input_dim));
  meta.push_back(static_cast<double>(config.classes));
  meta.push_back(config.head == HeadKind::plfc ? 0.0 : 1.0);
  meta.push_back(config.norm.kind == NormSpec::Kind::gyrolbn
                     ? 0.0
                     : (config.norm.kind == NormSpec::Kind::gyrobn ? 1.0 : 2.0));
  meta.push_back(static_cast<double>(config.norm.iters));
  meta.push_back(config.dropout_p);
  meta.push_back(config.curvature);
  meta.push_back(config.track_running ? 1.0 : 0.0);
  meta.push_back(static_cast<double>(config.hidden.size()));
  for (std::size_t h : config.hidden) meta.push_back(static_cast<double>(h));
  return Tensor::from_vector(std::move(meta));
}

ModelConfig Classifier::decode_model_meta(const Tensor& meta) {
  const auto& v = meta.data();
  if (meta.rank() != 1 || v.size() < 10) throw ConfigError("checkpoint: malformed model meta");
  ModelConfig config;
  config.preset = v[0] == 0.0 ? "mlp" : "cnn";
  config.input_dim = static_cast<std::size_t>(v[1]);
  config.classes = static_cast<std::size_t>(v[2]);
  config.head = v[3] == 0.0 ? HeadKind::plfc : HeadKind::lfc;
  config.norm.kind = v[4] == 0.0 ? NormSpec::Kind::gyrolbn
                                 : (v[4] == 1.0 ? NormSpec::Kind::gyrobn : NormSpec::Kind::none);
  config.norm.iters = static_cast<int>(v[5]);
  config.dropout_p = v[6];
  config.curvature = v[7];
  config.track_running = v[8] != 0.0;
  const auto n_hidden = static_cast<std::size_t>(v[9]);
  if (v.size() != 10 + n_hidden) throw ConfigError("checkpoint: malformed model meta");
  for (std::size_t i = 0; i < n_hidden; ++i) {
    config.hidden.push_back(static_cast<std::size_t>(v[10 + i]));
  }
  return config;
}

std::vector<NamedTensor> Classifier::state_sections() const {
  std::vector<NamedTensor> out;
  out.push_back({"meta/model", encode_model_meta(config_)});
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::string prefix = "block" + std::to_string(b) + ".";
    out.push_back({prefix + "Z", blocks_[b].fc.Z});
    out.push_back({prefix + "a", blocks_[b].fc.a});
    out.push_back({prefix + "bias", blocks_[b].bias.coords()});
    if (config_.norm.kind != NormSpec::Kind::none) {
      const NormState& ns = blocks_[b].norm;
      out.push_back({prefix + "gamma", ns.gamma});
      out.push_back({prefix + "beta", ns.beta.coords()});
      out.push_back({prefix + "norm.running_mean", ns.running_mean.coords()});
      out.push_back({prefix + "norm.running_var", Tensor::scalar(ns.running_var)});
      out.push_back({prefix + "norm.momentum", Tensor::scalar(ns.momentum)});
      out.push_back({prefix + "norm.eps", Tensor::scalar(ns.eps)});
      out.push_back({prefix + "norm.flags",
                     Tensor::from_vector({ns.track_running ? 1.0 : 0.0,
                                          ns.stats_initialized ? 1.0 : 0.0})});
    }
  }
  if (config_.head == HeadKind::plfc) {
    out.push_back({"head.Z", head_.Z});
    out.push_back({"head.a", head_.a});
  } else {
    out.push_back({"head.W", lfc_W_});
  }
  return out;
}

void Classifier::load_state_sections(const std::vector<NamedTensor>& sections) {
  auto find = [&sections](const std::string& name) -> const Tensor& {
    for (const NamedTensor& s : sections) {
      if (s.name == name) return s.value;
    }
    throw ConfigError("checkpoint: missing section '" + name + "'");
  };
  const Curvature curv = config_.curv();
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::string prefix = "block" + std::to_string(b) + ".";
    blocks_[b].fc.Z = find(prefix + "Z");
    blocks_[b].fc.a = find(prefix + "a");
    blocks_[b].bias = LorentzPoint::from_ambient(find(prefix + "bias"), curv);
    if (config_.norm.kind != NormSpec::Kind::none) {
      NormState& ns = blocks_[b].norm;
      ns.gamma = find(prefix + "gamma");
      ns.beta = LorentzPoint::from_ambient(find(prefix + "beta"), curv);
      ns.running_mean = LorentzPoint::from_ambient(find(prefix + "norm.running_mean"), curv);
      ns.running_var = find(prefix + "norm.running_var").item();
      ns.momentum = find(prefix + "norm.momentum").item();
      ns.eps = find(prefix + "norm.eps").item();
      const Tensor& flags = find(prefix + "norm.flags");
      ns.track_running = flags.at(0) != 0.0;
      ns.stats_initialized = flags.at(1) != 0.0;
    }
  }
  if (config_.head == HeadKind::plfc) {
    head_.Z = find("head.Z");
    head_.a = find("head.a");
  } else {
    lfc_W_ = find("head.W");
  }
}

}  // namespace ilnn
