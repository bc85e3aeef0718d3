#pragma once

#include <cmath>

#include "ilnn/tensor.hpp"

namespace ilnn {

/// Constant negative sectional curvature of the hyperboloid.
struct Curvature {
  explicit Curvature(double k_ = -1.0) : k(k_) {
    if (!(k < 0.0) || !std::isfinite(k)) {
      throw ConfigError("curvature must be a finite negative real");
    }
  }

  double k;

  double neg() const { return -k; }                    // -K > 0
  double sqrt_neg() const { return std::sqrt(-k); }    // sqrt(-K)
  double radius() const { return 1.0 / std::sqrt(-k); }  // 1/sqrt(-K), origin time

  friend bool operator==(const Curvature& a, const Curvature& b) { return a.k == b.k; }
  friend bool operator!=(const Curvature& a, const Curvature& b) { return !(a == b); }
};

/// Point on the upper hyperboloid sheet: <x,x>_L = 1/K, x0 > 0.
/// Coordinates are an ambient rank-1 tensor [x0, x_s] of length 1+n, so
/// points flow through the differentiation tape like any other value.
class LorentzPoint {
 public:
  /// Validates the manifold invariant (1e-9 relative) and the sheet sign.
  static LorentzPoint from_ambient(Tensor coords, Curvature curvature);

  const Tensor& coords() const { return coords_; }
  Curvature curvature() const { return curvature_; }

  std::size_t dim() const { return coords_.size() - 1; }          // n
  std::size_t ambient_dim() const { return coords_.size(); }      // 1+n

  Tensor time() const { return slice(coords_, 0, 1); }
  Tensor space() const { return slice(coords_, 1, dim()); }
  double time_value() const { return coords_.at(0); }

  /// |K<x,x>_L - 1|, the manifold constraint residual.
  double constraint_residual() const;

  /// Values equal and same curvature (exact comparison, for tests).
  bool same_values(const LorentzPoint& other) const;

 private:
  friend LorentzPoint unchecked_point(Tensor coords, Curvature curvature);
  LorentzPoint(Tensor coords, Curvature curvature)
      : coords_(std::move(coords)), curvature_(curvature) {}

  Tensor coords_;
  Curvature curvature_;
};

/// Trusted constructor for coordinates produced by on-manifold formulas.
LorentzPoint unchecked_point(Tensor coords, Curvature curvature);

/// Minkowski-orthogonal vector attached to a base point.
class TangentVector {
 public:
  /// Validates <base, components>_L = 0 within 1e-9 absolute.
  static TangentVector from_parts(LorentzPoint base, Tensor components);

  const LorentzPoint& base() const { return base_; }
  const Tensor& components() const { return components_; }

  /// sqrt(<v,v>_L); nonnegative for tangent vectors.
  Tensor lorentz_norm() const;

 private:
  friend TangentVector unchecked_tangent(LorentzPoint base, Tensor components);
  TangentVector(LorentzPoint base, Tensor components)
      : base_(std::move(base)), components_(std::move(components)) {}

  LorentzPoint base_;
  Tensor components_;
};

TangentVector unchecked_tangent(LorentzPoint base, Tensor components);

// ---------------------------------------------------------------------------
// Closed-form operators.
// ---------------------------------------------------------------------------

/// -u0*v0 + sum_i ui*vi, signature (-,+,...,+).
Tensor minkowski_inner(const Tensor& u, const Tensor& v);

/// Squared Lorentzian (chord) distance 2/K - 2<x,y>_L.
Tensor lorentz_sq_chord(const LorentzPoint& x, const LorentzPoint& y);

/// Geodesic distance (1/sqrt(-K)) * acosh(K<x,y>_L). The acosh argument is
/// clamped to 1 inside [1-1e-9, 1); values below the window are an error.
Tensor geodesic_dist(const LorentzPoint& x, const LorentzPoint& y);

/// Squared geodesic distance with a gradient that stays finite at
/// coincident points (acosh has infinite slope at 1, its square does not).
Tensor sq_geodesic_dist(const LorentzPoint& x, const LorentzPoint& y);

/// The pole ((-K)^{-1/2}, 0, ..., 0).
LorentzPoint origin(Curvature curvature, std::size_t n);

/// Lifts spatial coordinates onto the sheet:
/// [sqrt((-K)^{-1} + ||space||^2), space].
LorentzPoint lift_space(const Tensor& space, Curvature curvature);

/// Drops the time entry and recomputes it from the spatial entries. This is
/// the single projection rule used everywhere in the library.
LorentzPoint project_to_hyperboloid(const Tensor& ambient, Curvature curvature);

/// cosh(alpha) x + sinh(alpha) v/alpha, alpha = sqrt(-K) ||v||_L.
LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& v);

/// Inverse of exp_map; log_x(x) = 0. At the pole the direction simplifies to
/// a purely spatial vector.
TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y);

/// v + <y,v>_L / (1/(-K) - <x,y>_L) * (x+y); carries v from T_x to T_y.
TangentVector parallel_transport(const LorentzPoint& x, const LorentzPoint& y,
                                 const TangentVector& v);

/// Isometry onto the Poincare ball: x_s / (x0 + r).
Tensor lorentz_to_poincare(const LorentzPoint& x);

/// Inverse ball isometry; ||u|| must be below the ball radius 1/sqrt(-K).
LorentzPoint poincare_to_lorentz(const Tensor& u, Curvature curvature);

// Tolerances referenced throughout.
inline constexpr double kManifoldRelTol = 1e-9;
inline constexpr double kTangencyTol = 1e-9;
inline constexpr double kTangencyHardTol = 1e-6;
inline constexpr double kAcoshClampWindow = 1e-9;
inline constexpr double kTransportDenomFloor = 1e-12;

}  // namespace ilnn
