#include "ilnn/normstats.hpp"

#include <cmath>

namespace ilnn {

namespace {

void require_batch_frame(const std::vector<LorentzPoint>& points, const char* op) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].curvature() != points[0].curvature()) {
      throw ConfigError(std::string(op) + ": curvature mismatch inside batch");
    }
    if (points[i].ambient_dim() != points[0].ambient_dim()) {
      throw DimensionError(std::string(op) + ": dimension mismatch inside batch");
    }
  }
}

}  // namespace

NormState NormState::init(Curvature curvature, std::size_t n, double momentum, double eps,
                          bool track_running) {
  if (!(momentum > 0.0 && momentum <= 1.0)) throw ConfigError("NormState: momentum in (0,1] required");
  if (!(eps > 0.0)) throw ConfigError("NormState: eps must be positive");
  return NormState{Tensor::scalar(1.0), origin(curvature, n), origin(curvature, n),
                   1.0,      momentum,  eps,
                   track_running, false};
}

IterBudget IterBudget::fixed(int n) {
  if (n < 1) throw ConfigError("IterBudget: at least one iteration required");
  return IterBudget{false, n};
}

IterBudget IterBudget::until_convergence() { return IterBudget{true, 0}; }

LorentzPoint lorentzian_centroid(const std::vector<LorentzPoint>& points,
                                 const std::vector<double>& weights) {
  if (points.empty()) throw ContractError("lorentzian_centroid: empty batch");
  require_batch_frame(points, "lorentzian_centroid");
  if (!weights.empty() && weights.size() != points.size()) {
    throw DimensionError("lorentzian_centroid: one weight per point expected");
  }
  double weight_sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractError("lorentzian_centroid: weights must be nonnegative");
    weight_sum += w;
  }
  if (!weights.empty() && weight_sum <= 0.0) {
    throw ContractError("lorentzian_centroid: weights must have positive sum");
  }

  const Curvature curv = points[0].curvature();
  Tensor acc = weights.empty() ? points[0].coords() : weights[0] * points[0].coords();
  for (std::size_t i = 1; i < points.size(); ++i) {
    acc = acc + (weights.empty() ? points[i].coords() : weights[i] * points[i].coords());
  }
  // The weighted sum of upper-sheet points is timelike, so <s,s>_L < 0 and
  // |  ||s||_L | = sqrt(-<s,s>_L).
  Tensor q = minkowski_inner(acc, acc);
  if (!(q.item() < 0.0)) {
    throw NumericDomainError("lorentzian_centroid: weighted sum is not timelike");
  }
  Tensor denom = curv.sqrt_neg() * sqrt(neg(q));
  return unchecked_point(acc / denom, curv);
}

Tensor frechet_variance(const std::vector<LorentzPoint>& points, const LorentzPoint& mean) {
  if (points.empty()) throw ContractError("frechet_variance: empty batch");
  Tensor acc = lorentz_sq_chord(points[0], mean);
  for (std::size_t i = 1; i < points.size(); ++i) {
    acc = acc + lorentz_sq_chord(points[i], mean);
  }
  return acc / static_cast<double>(points.size());
}

LorentzPoint frechet_mean_iterative(const std::vector<LorentzPoint>& points, IterBudget budget) {
  if (points.empty()) throw ContractError("frechet_mean_iterative: empty batch");
  require_batch_frame(points, "frechet_mean_iterative");
  const double inv_m = 1.0 / static_cast<double>(points.size());
  LorentzPoint mu = lorentzian_centroid(points);

  const int max_steps = budget.converge ? 1000 : budget.iters;
  for (int step = 0; step < max_steps; ++step) {
    Tensor tangent_mean = log_map(mu, points[0]).components();
    for (std::size_t i = 1; i < points.size(); ++i) {
      tangent_mean = tangent_mean + log_map(mu, points[i]).components();
    }
    tangent_mean = inv_m * tangent_mean;
    TangentVector t = unchecked_tangent(mu, tangent_mean);
    const double step_norm = t.lorentz_norm().item();
    // Re-project each iterate: the constraint residual otherwise compounds
    // geometrically through the exp/log cycle.
    mu = project_to_hyperboloid(exp_map(mu, t).coords(), mu.curvature());
    if (budget.converge && step_norm < 1e-10) return mu;
  }
  if (budget.converge) {
    throw ConvergenceError("frechet_mean_iterative: no convergence after 1000 steps");
  }
  return mu;
}

namespace {

// Variance of a batch as mean squared geodesic distance to `mean`.
Tensor geodesic_variance(const std::vector<LorentzPoint>& points, const LorentzPoint& mean) {
  Tensor acc = Tensor::scalar(0.0);
  for (const LorentzPoint& p : points) {
    Tensor d = geodesic_dist(p, mean);
    acc = acc + mul(d, d);
  }
  return acc / static_cast<double>(points.size());
}

void update_running(NormState& state, const BatchStats& stats) {
  // Running statistics live outside the differentiation graph.
  LorentzPoint mu = unchecked_point(stats.mean.coords().detach(), stats.mean.curvature());
  TangentVector toward = log_map(state.running_mean, mu);
  TangentVector step =
      unchecked_tangent(state.running_mean, state.momentum * toward.components().detach());
  state.running_mean = exp_map(state.running_mean, step);
  state.running_var =
      (1.0 - state.momentum) * state.running_var + state.momentum * stats.variance.item();
  state.stats_initialized = true;
}

std::vector<LorentzPoint> normalize_batch(const std::vector<LorentzPoint>& batch,
                                          NormState& state, Mode mode, const BatchStats* train_stats) {
  if (batch.empty()) return {};
  require_batch_frame(batch, "normalization");
  if (batch[0].curvature() != state.beta.curvature() ||
      batch[0].ambient_dim() != state.beta.ambient_dim()) {
    throw ConfigError("normalization: state and batch disagree on curvature or dimension");
  }

  LorentzPoint mu = state.running_mean;
  Tensor sigma = Tensor::scalar(state.running_var);
  if (mode == Mode::train || !state.track_running) {
    mu = train_stats->mean;
    sigma = train_stats->variance;
  } else if (!state.stats_initialized) {
    throw StateError("normalization: eval requested before running statistics were updated");
  }

  if (mode == Mode::train && state.track_running) {
    update_running(state, *train_stats);
  }

  Tensor scale = state.gamma / sqrt(sigma + state.eps);
  LorentzPoint mu_inv = gyro_inverse(mu);
  std::vector<LorentzPoint> out;
  out.reserve(batch.size());
  for (const LorentzPoint& x : batch) {
    LorentzPoint centered = gyro_add(mu_inv, x);
    LorentzPoint scaled = gyro_scale(scale, centered);
    out.push_back(gyro_add(state.beta, scaled));
  }
  return out;
}

}  // namespace

std::vector<LorentzPoint> gyrolbn_forward(const std::vector<LorentzPoint>& batch,
                                          NormState& state, Mode mode) {
  const bool need_batch_stats = mode == Mode::train || !state.track_running;
  if (mode == Mode::train && batch.empty()) {
    throw ContractError("gyrolbn_forward: empty batch in train mode");
  }
  if (batch.empty()) return {};
  if (need_batch_stats) {
    BatchStats stats{lorentzian_centroid(batch), Tensor()};
    stats.variance = frechet_variance(batch, stats.mean);
    return normalize_batch(batch, state, mode, &stats);
  }
  return normalize_batch(batch, state, mode, nullptr);
}

std::vector<LorentzPoint> gyrobn_forward(const std::vector<LorentzPoint>& batch,
                                         NormState& state, Mode mode, IterBudget budget) {
  const bool need_batch_stats = mode == Mode::train || !state.track_running;
  if (mode == Mode::train && batch.empty()) {
    throw ContractError("gyrobn_forward: empty batch in train mode");
  }
  if (batch.empty()) return {};
  if (need_batch_stats) {
    BatchStats stats{frechet_mean_iterative(batch, budget), Tensor()};
    stats.variance = geodesic_variance(batch, stats.mean);
    return normalize_batch(batch, state, mode, &stats);
  }
  return normalize_batch(batch, state, mode, nullptr);
}

}  // namespace ilnn
