#include "ilnn/lorentz.hpp"

#include <algorithm>
#include <cmath>

namespace ilnn {

namespace {

void require_same_frame(const LorentzPoint& x, const LorentzPoint& y, const char* op) {
  if (x.curvature() != y.curvature()) {
    throw ConfigError(std::string(op) + ": curvature mismatch");
  }
  if (x.ambient_dim() != y.ambient_dim()) {
    throw DimensionError(std::string(op) + ": dimension mismatch");
  }
}

void require_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw NumericDomainError(std::string(op) + ": non-finite input");
}

double minkowski_inner_value(const std::vector<double>& u, const std::vector<double>& v) {
  double s = -u[0] * v[0];
  for (std::size_t i = 1; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

}  // namespace

// --------------------------------------------------------------------------
// Types
// --------------------------------------------------------------------------

LorentzPoint unchecked_point(Tensor coords, Curvature curvature) {
  return LorentzPoint(std::move(coords), curvature);
}

TangentVector unchecked_tangent(LorentzPoint base, Tensor components) {
  return TangentVector(std::move(base), std::move(components));
}

LorentzPoint LorentzPoint::from_ambient(Tensor coords, Curvature curvature) {
  if (coords.rank() != 1 || coords.size() < 2) {
    throw DimensionError("LorentzPoint: ambient vector of length >= 2 expected");
  }
  LorentzPoint p(std::move(coords), curvature);
  if (p.time_value() <= 0.0) {
    throw ContractError("LorentzPoint: time coordinate must be positive (upper sheet)");
  }
  if (p.constraint_residual() > kManifoldRelTol) {
    throw ContractError("LorentzPoint: <x,x>_L = 1/K violated beyond tolerance");
  }
  return p;
}

double LorentzPoint::constraint_residual() const {
  const auto& c = coords_.data();
  return std::abs(curvature_.k * minkowski_inner_value(c, c) - 1.0);
}

bool LorentzPoint::same_values(const LorentzPoint& other) const {
  return curvature_ == other.curvature_ && coords_.data() == other.coords_.data();
}

TangentVector TangentVector::from_parts(LorentzPoint base, Tensor components) {
  if (components.rank() != 1 || components.size() != base.ambient_dim()) {
    throw DimensionError("TangentVector: component length must match the base point");
  }
  const double pairing =
      minkowski_inner_value(base.coords().data(), components.data());
  if (std::abs(pairing) > kTangencyTol) {
    throw ContractError("TangentVector: <base, components>_L = 0 violated");
  }
  return TangentVector(std::move(base), std::move(components));
}

Tensor TangentVector::lorentz_norm() const {
  Tensor q = minkowski_inner(components_, components_);
  // Tangent directions are spacelike; tiny negative values are rounding.
  return sqrt(maximum(q, Tensor::scalar(0.0)));
}

// --------------------------------------------------------------------------
// Operators
// --------------------------------------------------------------------------

Tensor minkowski_inner(const Tensor& u, const Tensor& v) {
  if (u.rank() != 1 || v.rank() != 1 || u.size() != v.size() || u.size() < 2) {
    throw DimensionError("minkowski_inner: equal-length vectors of size >= 2 expected");
  }
  const std::size_t n = u.size() - 1;
  Tensor spatial = dot(slice(u, 1, n), slice(v, 1, n));
  Tensor temporal = mul(slice(u, 0, 1), slice(v, 0, 1));
  return sub(spatial, reshape(temporal, {}));
}

Tensor lorentz_sq_chord(const LorentzPoint& x, const LorentzPoint& y) {
  require_same_frame(x, y, "lorentz_sq_chord");
  const double K = x.curvature().k;
  return 2.0 / K - 2.0 * minkowski_inner(x.coords(), y.coords());
}

Tensor geodesic_dist(const LorentzPoint& x, const LorentzPoint& y) {
  require_same_frame(x, y, "geodesic_dist");
  const double K = x.curvature().k;
  Tensor arg = K * minkowski_inner(x.coords(), y.coords());
  const double a = arg.item();
  if (a < 1.0 - kAcoshClampWindow) {
    throw NumericDomainError("geodesic_dist: acosh argument below the clamping window");
  }
  return acosh(maximum(arg, Tensor::scalar(1.0))) / x.curvature().sqrt_neg();
}

Tensor sq_geodesic_dist(const LorentzPoint& x, const LorentzPoint& y) {
  require_same_frame(x, y, "sq_geodesic_dist");
  const double K = x.curvature().k;
  Tensor arg = K * minkowski_inner(x.coords(), y.coords());
  if (arg.item() < 1.0 - kAcoshClampWindow) {
    throw NumericDomainError("sq_geodesic_dist: acosh argument below the clamping window");
  }
  return acosh_sq(maximum(arg, Tensor::scalar(1.0))) / x.curvature().neg();
}

LorentzPoint origin(Curvature curvature, std::size_t n) {
  if (n < 1) throw DimensionError("origin: n >= 1 required");
  std::vector<double> c(n + 1, 0.0);
  c[0] = curvature.radius();
  return unchecked_point(Tensor::from_vector(std::move(c)), curvature);
}

LorentzPoint lift_space(const Tensor& space, Curvature curvature) {
  if (space.rank() != 1 || space.size() < 1) {
    throw DimensionError("lift_space: rank-1 spatial vector expected");
  }
  require_finite(space, "lift_space");
  Tensor time = sqrt(norm_sq(space) + 1.0 / curvature.neg());
  return unchecked_point(concat({reshape(time, {1}), space}), curvature);
}

LorentzPoint project_to_hyperboloid(const Tensor& ambient, Curvature curvature) {
  if (ambient.rank() != 1 || ambient.size() < 2) {
    throw DimensionError("project_to_hyperboloid: ambient vector of length >= 2 expected");
  }
  require_finite(ambient, "project_to_hyperboloid");
  return lift_space(slice(ambient, 1, ambient.size() - 1), curvature);
}

LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& v) {
  if (v.components().size() != x.ambient_dim()) {
    throw DimensionError("exp_map: tangent dimension mismatch");
  }
  // Tangency is re-checked against x itself, so callers may pass a tangent
  // whose base is a different but equal-valued point object.
  const double pairing =
      minkowski_inner_value(x.coords().data(), v.components().data());
  if (std::abs(pairing) > kTangencyHardTol) {
    throw ContractError("exp_map: tangency violated beyond 1e-6");
  }

  const Curvature curv = x.curvature();
  Tensor q = minkowski_inner(v.components(), v.components());
  const double qv = std::max(q.item(), 0.0);
  const double alpha_v = curv.sqrt_neg() * std::sqrt(qv);
  if (alpha_v == 0.0) {
    return unchecked_point(x.coords(), curv);
  }
  Tensor alpha = curv.sqrt_neg() * sqrt(maximum(q, Tensor::scalar(0.0)));
  Tensor out;
  if (alpha_v > 1e-8) {
    out = cosh(alpha) * x.coords() + (sinh(alpha) / alpha) * v.components();
  } else {
    // sinh(a)/a ~ 1 + a^2/6 avoids the 0/0 for very short steps.
    out = cosh(alpha) * x.coords() + (1.0 + mul(alpha, alpha) / 6.0) * v.components();
  }
  return unchecked_point(std::move(out), curv);
}

TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y) {
  require_same_frame(x, y, "log_map");
  const Curvature curv = x.curvature();
  const double K = curv.k;

  Tensor beta = K * minkowski_inner(x.coords(), y.coords());
  const double bv = beta.item();
  if (bv < 1.0 - kAcoshClampWindow) {
    throw NumericDomainError("log_map: beta below the clamping window");
  }
  if (bv <= 1.0) {
    // Coincident points (possibly within rounding): zero tangent.
    return unchecked_tangent(x, Tensor::zeros({x.ambient_dim()}));
  }

  // At the pole, y - beta*x has an exactly zero time coordinate; build it
  // that way so the tangency of the result is exact.
  bool at_pole = true;
  {
    const auto& c = x.coords().data();
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i] != 0.0) at_pole = false;
  }
  Tensor coeff = acosh(beta) / sqrt(mul(beta, beta) - 1.0);
  Tensor direction;
  if (at_pole) {
    const std::size_t n = x.dim();
    direction = concat({Tensor::zeros({1}), slice(y.coords(), 1, n)});
  } else {
    direction = y.coords() - beta * x.coords();
  }
  return unchecked_tangent(x, mul(coeff, direction));
}

TangentVector parallel_transport(const LorentzPoint& x, const LorentzPoint& y,
                                 const TangentVector& v) {
  require_same_frame(x, y, "parallel_transport");
  if (v.components().size() != x.ambient_dim()) {
    throw DimensionError("parallel_transport: tangent dimension mismatch");
  }
  const Curvature curv = x.curvature();
  Tensor denom = 1.0 / curv.neg() - minkowski_inner(x.coords(), y.coords());
  if (std::abs(denom.item()) < kTransportDenomFloor) {
    throw NumericDomainError("parallel_transport: degenerate transport denominator");
  }
  Tensor coeff = minkowski_inner(y.coords(), v.components()) / denom;
  Tensor out = v.components() + coeff * (x.coords() + y.coords());
  return unchecked_tangent(y, std::move(out));
}

Tensor lorentz_to_poincare(const LorentzPoint& x) {
  // r x_s / (x0 + r): the inverse of poincare_to_lorentz onto the ball of
  // radius r = 1/sqrt(-K). The r factor drops out at K = -1.
  const double r = x.curvature().radius();
  return (r * x.space()) / (x.time() + r);
}

LorentzPoint poincare_to_lorentz(const Tensor& u, Curvature curvature) {
  if (u.rank() != 1 || u.size() < 1) {
    throw DimensionError("poincare_to_lorentz: rank-1 vector expected");
  }
  require_finite(u, "poincare_to_lorentz");
  const double c = curvature.neg();
  const double r = curvature.radius();
  Tensor nsq = norm_sq(u);
  if (std::sqrt(nsq.item()) >= r) {
    throw NumericDomainError("poincare_to_lorentz: point outside the ball of radius 1/sqrt(-K)");
  }
  Tensor denom = 1.0 - c * nsq;
  Tensor time = r * (1.0 + c * nsq) / denom;
  Tensor space = 2.0 * u / denom;
  return unchecked_point(concat({reshape(time, {1}), space}), curvature);
}

}  // namespace ilnn
