#pragma once

#include <vector>

#include "ilnn/gyro.hpp"

namespace ilnn {

enum class Mode { train, eval };

/// Batch mean and dispersion of a set of hyperboloid points.
struct BatchStats {
  LorentzPoint mean;
  Tensor variance;  // scalar, >= 0
};

/// Learnable and running state of one normalization layer. One (gamma, beta,
/// stats) set covers the whole Lorentz feature vector of the layer.
struct NormState {
  Tensor gamma;              // positive scalar scale
  LorentzPoint beta;         // manifold bias
  LorentzPoint running_mean;
  double running_var;
  double momentum;
  double eps;
  bool track_running;
  bool stats_initialized;

  static NormState init(Curvature curvature, std::size_t n, double momentum = 0.1,
                        double eps = 1e-5, bool track_running = true);
};

/// Iteration budget for the Karcher fixed-point mean.
struct IterBudget {
  static IterBudget fixed(int n);
  static IterBudget until_convergence();

  bool converge = false;
  int iters = 1;
};

/// Closed-form weighted centroid (sum(v_i x_i)) / (sqrt(-K) |.||sum||_L|),
/// the minimizer of the weighted squared Lorentzian (chord) distance.
/// Empty `weights` means equal weights.
LorentzPoint lorentzian_centroid(const std::vector<LorentzPoint>& points,
                                 const std::vector<double>& weights = {});

/// Mean squared Lorentzian (chord) distance to `mean`.
Tensor frechet_variance(const std::vector<LorentzPoint>& points, const LorentzPoint& mean);

/// Karcher iteration mu <- exp_mu(mean log_mu(x_i)), started from the
/// closed-form centroid. In convergence mode, stops when the step norm drops
/// below 1e-10 (error after 1000 steps).
LorentzPoint frechet_mean_iterative(const std::vector<LorentzPoint>& points, IterBudget budget);

/// Gyro normalization with closed-form statistics:
///   out_i = beta (+) ( gamma/sqrt(sigma_B + eps) (.) ( (-)mu_B (+) x_i ) )
/// Train mode uses batch statistics and, when tracking, folds them into the
/// running estimates (geodesic interpolation for the mean). Eval mode uses
/// the running statistics when tracking, otherwise the batch's own.
std::vector<LorentzPoint> gyrolbn_forward(const std::vector<LorentzPoint>& batch,
                                          NormState& state, Mode mode);

/// Iterative-mean variant: mu_B from the Karcher iteration and sigma_B as the
/// mean squared geodesic distance. Same normalization map and running-stat
/// behavior as gyrolbn_forward.
std::vector<LorentzPoint> gyrobn_forward(const std::vector<LorentzPoint>& batch,
                                         NormState& state, Mode mode, IterBudget budget);

}  // namespace ilnn
