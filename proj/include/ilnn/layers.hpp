#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ilnn/normstats.hpp"
#include "ilnn/rng.hpp"

namespace ilnn {

/// Per-output-unit hyperplane parameters: row k of Z is the orientation z_k,
/// a[k] the offset. Rows are kept away from zero norm (see kMinHyperplaneNorm);
/// the optimizer re-floors them after each step.
struct HyperplaneParams {
  Tensor Z;  // m x n
  Tensor a;  // m

  std::size_t out_dim() const { return Z.shape()[0]; }
  std::size_t in_dim() const { return Z.shape()[1]; }

  /// z_k ~ N(0, 1/n), a_k = 0; near the flat limit this makes the layer an
  /// ordinary fan-in-scaled affine map at initialization.
  static HyperplaneParams init(std::size_t out_dim, std::size_t in_dim, Rng& rng);
};

inline constexpr double kMinHyperplaneNorm = 1e-12;

/// Unsigned distance from x to the hyperplane with orientation z and offset
/// a. The denominator of the closed form collapses to ||z|| (cosh^2 - sinh^2
/// = 1), which is what is computed here; the unsimplified radical lives in
/// the test oracle.
Tensor point_hyperplane_distance(const LorentzPoint& x, const Tensor& z, const Tensor& a);
Tensor point_hyperplane_distance(const LorentzPoint& x, const Tensor& z, double a);

/// Signed, margin-weighted distance logits
///   v_k = (1/sqrt(-K)) sign(alpha_k) ||z_k|| |asinh(sqrt(-K) alpha_k/||z_k||)|
/// with alpha_k = cosh(sqrt(-K) a_k) <z_k, x_s> - sinh(sqrt(-K) a_k) ||z_k|| x_0.
Tensor mlr_logits(const LorentzPoint& x, const HyperplaneParams& params);

/// Spatial coordinates from logits: y_s,k = sinh(sqrt(-K) v_k)/sqrt(-K),
/// time recomputed from the hyperboloid constraint.
LorentzPoint plfc_from_logits(const Tensor& v, Curvature curvature);

/// Signed distances of y to the coordinate hyperplanes,
/// (1/sqrt(-K)) asinh(sqrt(-K) y_s,k); inverts plfc_from_logits.
Tensor coordinate_distance_logits(const LorentzPoint& y);

/// Point-to-hyperplane fully connected layer; optional gyro-bias applied as
/// y <- y (+) bias.
LorentzPoint plfc_forward(const LorentzPoint& x, const HyperplaneParams& params,
                          const std::optional<LorentzPoint>& bias = std::nullopt);

/// Extrinsic baseline head: spatial coordinates taken directly from u, plus
/// the asinh distance logits (which contract margins).
std::pair<LorentzPoint, Tensor> lfc_head_forward(const Tensor& u, Curvature curvature);

/// exp( (psi(n/2) - psi(n_i/2)) / 2 ): per-block scale that keeps the
/// expected log spatial radius invariant to the number of concatenated
/// blocks.
double log_radius_scale(std::size_t n, std::size_t n_i);

/// Concatenates N equal-dimension points into one point of N*d spatial
/// coordinates, scaling each spatial block by log_radius_scale(N*d, d) and
/// recomputing one time coordinate from the blocks' times.
LorentzPoint log_cat(const std::vector<LorentzPoint>& blocks);

/// Grid of hyperboloid points, row-major.
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<LorentzPoint> points;

  static FeatureMap from_points(std::size_t height, std::size_t width,
                                std::vector<LorentzPoint> points);
  const LorentzPoint& at(std::size_t row, std::size_t col) const;
  std::size_t channel_dim() const { return points.front().dim(); }
  Curvature curvature() const { return points.front().curvature(); }
};

struct ConvSpec {
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// Receptive fields are gathered row-major (origin where padded), log_cat'd
/// and pushed through the PLFC. Output extent follows
/// (size + 2*padding - kernel)/stride + 1.
FeatureMap lorentz_conv(const FeatureMap& fmap, const HyperplaneParams& params,
                        const ConvSpec& spec,
                        const std::optional<LorentzPoint>& bias = std::nullopt);

/// Each output cell is the equal-weight Lorentzian centroid of its window.
FeatureMap lorentz_avg_pool(const FeatureMap& fmap, std::size_t window_h, std::size_t window_w,
                            std::size_t stride);

/// ReLU on the spatial coordinates, time recomputed. Idempotent.
LorentzPoint lorentz_relu(const LorentzPoint& x);

/// Mask-and-project dropout: Bernoulli(1-p) keep mask on the spatial
/// coordinates, survivors scaled by 1/(1-p), time recomputed. Identity at
/// evaluation and for p = 0.
LorentzPoint lorentz_dropout(const LorentzPoint& x, double p, Mode mode, Rng& rng);

}  // namespace ilnn
