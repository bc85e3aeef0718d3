#include "ilnn/gyro.hpp"

namespace ilnn {

LorentzPoint gyro_add(const LorentzPoint& x, const LorentzPoint& y) {
  if (x.curvature() != y.curvature()) throw ConfigError("gyro_add: curvature mismatch");
  if (x.ambient_dim() != y.ambient_dim()) throw DimensionError("gyro_add: dimension mismatch");
  LorentzPoint pole = origin(x.curvature(), x.dim());
  TangentVector at_pole = log_map(pole, y);
  TangentVector at_x = parallel_transport(pole, x, at_pole);
  return exp_map(x, at_x);
}

LorentzPoint gyro_scale(const Tensor& t, const LorentzPoint& x) {
  if (t.size() != 1) throw ContractError("gyro_scale: scalar factor expected");
  if (!t.all_finite()) throw NumericDomainError("gyro_scale: non-finite factor");
  LorentzPoint pole = origin(x.curvature(), x.dim());
  TangentVector v = log_map(pole, x);
  Tensor scaled = mul(t, v.components());
  return exp_map(pole, unchecked_tangent(pole, std::move(scaled)));
}

LorentzPoint gyro_scale(double t, const LorentzPoint& x) {
  return gyro_scale(Tensor::scalar(t), x);
}

LorentzPoint gyro_inverse(const LorentzPoint& x) {
  const std::size_t n = x.dim();
  return unchecked_point(concat({x.time(), neg(slice(x.coords(), 1, n))}), x.curvature());
}

}  // namespace ilnn
