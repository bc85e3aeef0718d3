#include "ilnn/optim.hpp"

#include <cmath>

#include "ilnn/layers.hpp"  // kMinHyperplaneNorm

namespace ilnn {

TangentVector riemannian_grad(const LorentzPoint& x, const Tensor& ambient_grad) {
  if (ambient_grad.rank() != 1 || ambient_grad.size() != x.ambient_dim()) {
    throw DimensionError("riemannian_grad: ambient gradient length mismatch");
  }
  // h = eta g with eta = diag(-1, 1, ..., 1)
  Tensor h = concat({neg(slice(ambient_grad, 0, 1)),
                     slice(ambient_grad, 1, ambient_grad.size() - 1)});
  // The normal component is <x,h>/<x,x> x; dividing by the point's actual
  // <x,x>_L (= 1/K up to rounding) keeps the result tangent to machine
  // precision even when x carries a small constraint residual, so repeated
  // steps do not feed the residual back into themselves.
  Tensor normal_part =
      minkowski_inner(x.coords(), h) / minkowski_inner(x.coords(), x.coords());
  Tensor projected = h - normal_part * x.coords();
  return unchecked_tangent(x, std::move(projected));
}

void RsgdOptimizer::add_euclidean(std::string name, Tensor* value, bool decay,
                                  ParamConstraint constraint) {
  Entry e;
  e.name = std::move(name);
  e.tensor = value;
  e.decay = decay;
  e.constraint = constraint;
  e.momentum_buf = Tensor::zeros(value->shape());
  entries_.push_back(std::move(e));
}

void RsgdOptimizer::add_lorentz(std::string name, LorentzPoint* value) {
  Entry e;
  e.name = std::move(name);
  e.lorentz = true;
  e.point = value;
  entries_.push_back(std::move(e));
}

namespace {

Tensor apply_constraint(const Tensor& value, ParamConstraint constraint) {
  switch (constraint) {
    case ParamConstraint::none:
      return value;
    case ParamConstraint::positive_floor: {
      std::vector<double> v = value.data();
      for (double& x : v) x = std::max(x, 1e-6);
      return Tensor::from_data(value.shape(), std::move(v));
    }
    case ParamConstraint::row_norm_floor: {
      if (value.rank() != 2) return value;
      const std::size_t rows = value.shape()[0], cols = value.shape()[1];
      std::vector<double> v = value.data();
      for (std::size_t i = 0; i < rows; ++i) {
        double nsq = 0.0;
        for (std::size_t j = 0; j < cols; ++j) nsq += v[i * cols + j] * v[i * cols + j];
        const double n = std::sqrt(nsq);
        if (n >= kMinHyperplaneNorm) continue;
        if (n == 0.0) {
          v[i * cols] = kMinHyperplaneNorm;
        } else {
          const double s = kMinHyperplaneNorm / n;
          for (std::size_t j = 0; j < cols; ++j) v[i * cols + j] *= s;
        }
      }
      return Tensor::from_data(value.shape(), std::move(v));
    }
  }
  return value;
}

}  // namespace

void RsgdOptimizer::step(const std::vector<Tensor>& grads) {
  if (grads.size() != entries_.size()) {
    throw ContractError("RsgdOptimizer::step: one gradient per registered parameter expected");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    Entry& e = entries_[i];
    const Tensor& g = grads[i];
    if (!g.all_finite()) {
      throw TrainingAbortedError("non-finite gradient for parameter " + e.name);
    }
    if (e.lorentz) {
      TangentVector rg = riemannian_grad(*e.point, g.detach());
      TangentVector step_vec =
          unchecked_tangent(*e.point, (-options_.lr) * rg.components());
      *e.point = exp_map(*e.point, step_vec);
    } else {
      if (g.shape() != e.tensor->shape()) {
        throw DimensionError("RsgdOptimizer::step: gradient shape mismatch for " + e.name);
      }
      Tensor buf = options_.momentum * e.momentum_buf + g.detach();
      Tensor updated = *e.tensor - options_.lr * buf;
      if (e.decay && options_.weight_decay != 0.0) {
        updated = updated - (options_.lr * options_.weight_decay) * *e.tensor;
      }
      e.momentum_buf = buf.detach();
      *e.tensor = apply_constraint(updated.detach(), e.constraint);
    }
  }
}

}  // namespace ilnn
