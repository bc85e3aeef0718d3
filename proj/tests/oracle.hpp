#pragma once

// Independent brute-force references used only by the test suites. These
// deliberately avoid the production code paths they check: ball-route gyro
// operations go through raw-double Mobius arithmetic, gradients come from
// central differences, and the hyperplane evaluators keep the unsimplified
// denominator.

#include <functional>
#include <vector>

#include "ilnn/layers.hpp"
#include "ilnn/rng.hpp"

namespace ilnn::oracle {

/// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double step);

/// Mobius addition on the Poincare ball of curvature -c.
std::vector<double> mobius_add(const std::vector<double>& x, const std::vector<double>& y,
                               double c);

/// Poincare-ball geodesic distance at curvature -c.
double ball_distance(const std::vector<double>& u, const std::vector<double>& v, double c);

/// Gyroaddition through the ball: psi^{-1}(psi(x) mobius+ psi(y)), with the
/// coordinate maps evaluated in raw doubles.
LorentzPoint ball_gyro_add(const LorentzPoint& x, const LorentzPoint& y);

/// Signed logit with the unsimplified denominator
/// sqrt(||cosh(sqrt(-K)a) z||^2 - (sinh(sqrt(-K)a)||z||)^2).
double unsimplified_logit(const LorentzPoint& x, const std::vector<double>& z, double a);

/// Unsigned distance with the same unsimplified denominator.
double unsimplified_hyperplane_distance(const LorentzPoint& x, const std::vector<double>& z,
                                        double a);

struct LogRadiusStats {
  double pre_mean = 0.0;
  double pre_stderr = 0.0;
  double post_mean = 0.0;
  double post_stderr = 0.0;
  double scale = 1.0;
  std::size_t samples = 0;
};

/// Draws unit-variance Gaussian blocks, runs them through log_cat, and
/// reports the empirical mean/stderr of the log spatial radius before and
/// after the per-block scaling.
LogRadiusStats mc_log_radius(std::size_t block_dim, std::size_t block_count,
                             std::size_t samples, Rng& rng);

/// Tangent gradient descent on the mean squared geodesic distance, started
/// from the first point; an independent route to the Karcher mean.
LorentzPoint frechet_mean_gd(const std::vector<LorentzPoint>& points, double step_size,
                             int iterations);

/// True when `candidate` scores no worse than every random geodesic
/// perturbation of the given radius under `objective`.
bool beats_perturbations(const std::function<double(const LorentzPoint&)>& objective,
                         const LorentzPoint& candidate, double radius, int count, Rng& rng);

/// Uniform-ish random point: exp at the pole of a Gaussian tangent scaled to
/// the given typical radius.
LorentzPoint random_point(Curvature curvature, std::size_t n, double spread, Rng& rng);

}  // namespace ilnn::oracle
